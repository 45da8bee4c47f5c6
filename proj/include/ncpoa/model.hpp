#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ncpoa {

/// Per-user data rates, one entry per user. Users 0 and N-1 are the
/// network-coding pair; 1..N-2 are routing users.
using RateVector = Eigen::VectorXd;

struct LinearUtility {
  double gamma;
};

/// scale * x^(1-alpha) / (1-alpha), alpha in (0,1).
struct AlphaFairUtility {
  double alpha;
  double scale = 1.0;
};

/// Result of inverting a marginal utility. Linear utilities have a flat
/// marginal, so the preimage of a price is empty, everything, or nothing.
struct MarginalInverse {
  enum class Kind { Finite, Unbounded, Indeterminate };
  Kind kind;
  double rate;  // meaningful only for Finite

  static MarginalInverse finite(double r) { return {Kind::Finite, r}; }
  static MarginalInverse unbounded();
  static MarginalInverse indeterminate() { return {Kind::Indeterminate, 0.0}; }
  bool is_finite() const { return kind == Kind::Finite; }
};

class UtilityFunction {
 public:
  static UtilityFunction linear(double gamma) { return UtilityFunction(LinearUtility{gamma}); }
  static UtilityFunction alpha_fair(double alpha, double scale = 1.0) {
    return UtilityFunction(AlphaFairUtility{alpha, scale});
  }

  bool is_linear() const { return std::holds_alternative<LinearUtility>(form_); }
  const std::variant<LinearUtility, AlphaFairUtility>& form() const { return form_; }
  /// Slope of a linear utility; throws for alpha-fair.
  double gamma() const;

  double value(double x) const;
  /// +inf at x = 0 for alpha-fair (unbounded marginal).
  double marginal(double x) const;
  MarginalInverse inverse_marginal(double m) const;

  /// Empty when the invariants hold.
  std::optional<std::string> violation() const;

 private:
  explicit UtilityFunction(std::variant<LinearUtility, AlphaFairUtility> f) : form_(f) {}
  std::variant<LinearUtility, AlphaFairUtility> form_;
};

struct SideLinks {
  double a1;
  double aN;
};

/// A complete game instance. `side` present selects the costly-side-link
/// world (Game 3 / Problem 3); absent means zero-cost side links.
struct Scenario {
  std::vector<UtilityFunction> utilities;
  double a = 1.0;
  double beta = 1.0;
  std::optional<SideLinks> side;

  int n_users() const { return static_cast<int>(utilities.size()); }
  int last() const { return n_users() - 1; }
  bool all_linear() const;
  bool is_coding_user(int n) const { return n == 0 || n == last(); }
};

std::vector<std::string> validate_scenario(const Scenario& s);
/// Throws std::invalid_argument listing every violation.
void require_valid(const Scenario& s);

/// Game 3 / Problem 3 strategy profile.
struct FlowAllocation {
  RateVector y;
  double z1 = 0.0;
  double zN = 0.0;
  double v1 = 0.0;
  double vN = 0.0;

  static FlowAllocation zeros(int n) { return {RateVector::Zero(n), 0.0, 0.0, 0.0, 0.0}; }
};

using Profile = std::variant<RateVector, FlowAllocation>;

enum class Game { Routing = 1, Coding = 2, CostlySide = 3 };

double link_price(double a, double q);
double link_cost(double a, double q);

/// Bottleneck load of a Game 2 / Problem 2 profile.
double coded_load(const Scenario& s, const RateVector& x);
/// Bottleneck load of a Game 3 / Problem 3 profile.
double flow_load(const FlowAllocation& f);

double payoff(Game game, const Scenario& s, int user, const Profile& profile);
double payoff(Game game, const Scenario& s, int user, const RateVector& x);
double payoff(const Scenario& s, int user, const FlowAllocation& f);

/// Aggregate surplus: total utility minus total link cost. The problem index
/// matches the game index (1, 2, 3).
double surplus(Game problem, const Scenario& s, const Profile& profile);
double surplus(Game problem, const Scenario& s, const RateVector& x);
double surplus(const Scenario& s, const FlowAllocation& f);

/// Sum of what users pay the bottleneck link in Game 2.
double coded_payments(const Scenario& s, const RateVector& x);

std::string to_string(Game g);

/// Rate beyond which every user's marginal utility is below beta*a*x/2, so
/// every payoff and every surplus coordinate is strictly decreasing there.
/// Found by doubling from 1, capped at 1e9.
double rate_bound(const Scenario& s);

}  // namespace ncpoa
