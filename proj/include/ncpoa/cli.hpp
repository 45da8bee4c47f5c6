#pragma once

#include "ncpoa/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ncpoa::cli {

/// Malformed config or flag. Maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNoConvergence = 2;

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct ExperimentConfig {
  std::string command;
  int game = 2;
  std::string utilities;  // "linear:1,alpha:0.5,alpha:0.3:2"
  double a = 1.0;
  double beta = 1.0;
  std::optional<double> a1;
  std::optional<double> aN;

  std::uint64_t seed = 42;
  std::size_t count = 200;
  std::optional<int> n_users;
  double eps = 1e-4;
  std::string family;

  std::string ratios = "1:8:0.01";
  std::string levels = "0.5";
  std::string n_list = "2";
  std::string sides;  // per-command default when empty
  std::string a_range = "0:10";
  std::string alpha_range = "0:1";
  std::string scale_range = "0.5:2";
  std::string side_range = "0:5";

  int samples = 33;
  double damping = 0.5;
  int max_iter = 20000;
  double proximal = 1.0;
  double iter_tol = 1e-9;
  double verify_tol = 1e-6;

  std::string format = "csv";
  bool timestamp = true;
  std::string out;            // empty: stdout
  std::string emit_scenario;  // worst-family only
};

std::vector<std::string> commands();

/// `key = value` lines; '#' starts a comment. If any line starts with "#!",
/// only those lines are read, which lets a result file be fed back in.
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::string& path);

/// Applies pairs to `cfg`; unknown keys and bad values throw ConfigError.
void apply(ExperimentConfig& cfg, const KeyValues& pairs);
/// Everything that determines the output, in a fixed order. Omits `out`.
KeyValues resolved(const ExperimentConfig& cfg);
/// Scenario keys only (utilities, a, beta, a1, aN).
KeyValues scenario_pairs(const Scenario& s);

UtilityFunction parse_utility(const std::string& token);
std::string format_utilities(const Scenario& s);
Scenario build_scenario(const ExperimentConfig& cfg);

/// "lo:hi:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text);
std::pair<double, double> parse_range(const std::string& text);

std::string format_number(double v);

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& os, const Table& t, const KeyValues& config, const std::string& generated);
void write_json(std::ostream& os, const Table& t, const KeyValues& config, const std::string& generated);

/// Runs one experiment, writing the table to cfg.out or `out`.
int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ncpoa::cli
