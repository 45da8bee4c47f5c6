#pragma once

#include "ncpoa/equilibrium.hpp"
#include "ncpoa/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ncpoa {

enum class OutcomeKind { Point, Segment };

struct EfficiencyReport {
  Game game = Game::Routing;
  Scenario scenario;
  double ne_surplus_min = 0.0;
  double ne_surplus_max = 0.0;
  double opt_surplus = 0.0;
  double efficiency_min = 0.0;
  double efficiency_max = 0.0;
  OutcomeKind outcome_kind = OutcomeKind::Point;
  NashRegime regime = NashRegime::Unique;
  bool boundary = false;
  bool converged = true;
};

struct EfficiencyOptions {
  /// Interior samples on an equilibrium segment, besides its endpoints.
  int segment_samples = 33;
  IterOptions iter;
};

/// Equilibrium surplus over optimal surplus for the matching problem.
/// Throws std::domain_error when the optimal surplus is below 1e-12.
EfficiencyReport efficiency(const Scenario& s, Game game, const EfficiencyOptions& opts = {});

enum class FamilyId { Game1JT, Game2TwoUser, Game2General, Game2Subcase, Game3General };

std::string to_string(FamilyId id);
std::optional<FamilyId> parse_family(const std::string& name);
std::vector<FamilyId> all_families();

struct FamilyParams {
  double beta = 0.5;
  int n_users = 500;
  double eps = 1e-4;
};

struct WorstCaseFamily {
  FamilyId id;
  Game game;
  Scenario scenario;
  /// Limit value as N grows (exact for the two-user family).
  double predicted_efficiency;
  /// max of the routing slopes and the coding pair's summed slope.
  double sigma;
};

/// Linear worst-case constructions. The general families need n_users >= 3;
/// the two-user family ignores n_users.
WorstCaseFamily make_worst_family(FamilyId id, const FamilyParams& params = {});

/// Linear scan: the weaker coder has slope 1, the stronger one `ratio`, and
/// every routing user `level * (1 + ratio)`. Game 3 adds a1 = aN = side.
struct ScanGrid {
  std::vector<double> ratios;
  std::vector<double> routing_levels{0.5};
  std::vector<int> n_users{2};
  std::vector<double> side_slopes{1e-4};
  double a = 1.0;
};

struct ScanRow {
  double ratio = 0.0;
  double routing_level = 0.0;
  int n_users = 2;
  double side = 0.0;
  EfficiencyReport report;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::size_t argmin = 0;
  const ScanRow& worst() const { return rows.at(argmin); }
};

/// Throws std::invalid_argument on an empty grid.
ScanResult poa_scan(Game game, double beta, const ScanGrid& grid);

/// Sampling ranges; every draw lies in the open interval (lo, hi).
struct MonteCarloRanges {
  double a_lo = 0.0, a_hi = 10.0;
  double alpha_lo = 0.0, alpha_hi = 1.0;
  double scale_lo = 0.5, scale_hi = 2.0;
  double side_lo = 0.0, side_hi = 5.0;
  int n_users = 2;
};

struct MonteCarloRow {
  std::size_t index = 0;
  Scenario scenario;
  std::optional<EfficiencyReport> report;
  std::string error;  // set when the evaluation threw
  bool converged() const { return report && report->converged; }
};

/// Random alpha-fair scenarios drawn from one seeded stream, evaluated in
/// parallel, returned in draw order.
std::vector<MonteCarloRow> monte_carlo(Game game, double beta, std::size_t count, std::uint64_t seed,
                                       const MonteCarloRanges& ranges = {});

struct SideSweepParams {
  int n_users = 500;
  double a = 1.0;
  double coder_slope = 1.0;
  double routing_slope = 0.8;
};

struct SweepRow {
  double side = 0.0;
  EfficiencyReport report;
};

/// Game 3 efficiency for each a1 = aN in `slopes`.
std::vector<SweepRow> sweep_side_cost(const std::vector<double>& slopes, const SideSweepParams& base = {});

}  // namespace ncpoa
