#include "ncpoa/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ncpoa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_user(const Scenario& s, int user) {
  if (user < 0 || user >= s.n_users()) {
    throw std::out_of_range("user index " + std::to_string(user) + " out of range [0, " +
                            std::to_string(s.n_users()) + ")");
  }
}

void check_rates(const Scenario& s, const RateVector& x) {
  if (x.size() != s.n_users()) {
    throw std::invalid_argument("rate vector has " + std::to_string(x.size()) +
                                " entries, scenario has " + std::to_string(s.n_users()) +
                                " users");
  }
}

double routing_sum(const Scenario& s, const RateVector& x) {
  const int n = s.n_users();
  return n > 2 ? x.segment(1, n - 2).sum() : 0.0;
}

}  // namespace

MarginalInverse MarginalInverse::unbounded() { return {Kind::Unbounded, kInf}; }

double UtilityFunction::gamma() const {
  if (const auto* lin = std::get_if<LinearUtility>(&form_)) return lin->gamma;
  throw std::logic_error("gamma() requires a linear utility");
}

double UtilityFunction::value(double x) const {
  if (x < 0.0) throw std::domain_error("utility evaluated at a negative rate");
  return std::visit(Overloaded{
                        [x](const LinearUtility& u) { return u.gamma * x; },
                        [x](const AlphaFairUtility& u) {
                          const double e = 1.0 - u.alpha;
                          return u.scale * std::pow(x, e) / e;
                        },
                    },
                    form_);
}

double UtilityFunction::marginal(double x) const {
  if (x < 0.0) throw std::domain_error("marginal utility at a negative rate");
  return std::visit(Overloaded{
                        [](const LinearUtility& u) { return u.gamma; },
                        [x](const AlphaFairUtility& u) {
                          if (x == 0.0) return kInf;
                          return u.scale * std::pow(x, -u.alpha);
                        },
                    },
                    form_);
}

MarginalInverse UtilityFunction::inverse_marginal(double m) const {
  if (!(m > 0.0)) throw std::domain_error("inverse marginal needs a positive price");
  return std::visit(Overloaded{
                        [m](const LinearUtility& u) {
                          if (u.gamma > m) return MarginalInverse::unbounded();
                          if (u.gamma < m) return MarginalInverse::finite(0.0);
                          return MarginalInverse::indeterminate();
                        },
                        [m](const AlphaFairUtility& u) {
                          return MarginalInverse::finite(std::pow(m / u.scale, -1.0 / u.alpha));
                        },
                    },
                    form_);
}

std::optional<std::string> UtilityFunction::violation() const {
  return std::visit(
      Overloaded{
          [](const LinearUtility& u) -> std::optional<std::string> {
            if (!(u.gamma > 0.0) || !std::isfinite(u.gamma)) return "gamma must be > 0";
            return std::nullopt;
          },
          [](const AlphaFairUtility& u) -> std::optional<std::string> {
            if (!(u.alpha > 0.0 && u.alpha < 1.0)) return "alpha must lie in (0,1)";
            if (!(u.scale > 0.0) || !std::isfinite(u.scale)) return "scale must be > 0";
            return std::nullopt;
          },
      },
      form_);
}

bool Scenario::all_linear() const {
  for (const auto& u : utilities)
    if (!u.is_linear()) return false;
  return true;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  if (s.n_users() < 2) out.emplace_back("n_users must be >= 2");
  for (int n = 0; n < s.n_users(); ++n) {
    if (auto v = s.utilities[n].violation()) out.push_back("utilities[" + std::to_string(n) + "]: " + *v);
  }
  if (!(s.a > 0.0) || !std::isfinite(s.a)) out.emplace_back("a must be > 0");
  if (!(s.beta > 0.0 && s.beta <= 1.0)) out.emplace_back("beta must lie in (0,1]");
  if (s.side) {
    if (!(s.side->a1 > 0.0) || !std::isfinite(s.side->a1)) out.emplace_back("a1 must be > 0");
    if (!(s.side->aN > 0.0) || !std::isfinite(s.side->aN)) out.emplace_back("aN must be > 0");
  }
  return out;
}

void require_valid(const Scenario& s) {
  const auto problems = validate_scenario(s);
  if (problems.empty()) return;
  std::ostringstream msg;
  msg << "invalid scenario:";
  for (const auto& p : problems) msg << ' ' << p << ';';
  throw std::invalid_argument(msg.str());
}

double link_price(double a, double q) {
  if (q < 0.0) throw std::domain_error("negative link load");
  return a * q;
}

double link_cost(double a, double q) {
  if (q < 0.0) throw std::domain_error("negative link load");
  return 0.5 * a * q * q;
}

double coded_load(const Scenario& s, const RateVector& x) {
  check_rates(s, x);
  return routing_sum(s, x) + std::max(x(0), x(s.last()));
}

double flow_load(const FlowAllocation& f) { return f.y.sum() + std::max(f.z1, f.zN); }

double payoff(Game game, const Scenario& s, int user, const RateVector& x) {
  check_user(s, user);
  check_rates(s, x);
  const double xn = x(user);
  switch (game) {
    case Game::Routing:
      return s.utilities[user].value(xn) - xn * link_price(s.a, x.sum());
    case Game::Coding: {
      const double mu = link_price(s.a, coded_load(s, x));
      if (!s.is_coding_user(user)) return s.utilities[user].value(xn) - xn * mu;
      const double coded = std::min(x(0), x(s.last()));
      return s.utilities[user].value(xn) - (xn - (1.0 - s.beta) * coded) * mu;
    }
    case Game::CostlySide:
      throw std::invalid_argument("Game 3 payoffs take a FlowAllocation");
  }
  throw std::invalid_argument("unknown game");
}

double payoff(const Scenario& s, int user, const FlowAllocation& f) {
  check_user(s, user);
  if (!s.side) throw std::invalid_argument("Game 3 requires side-link slopes");
  if (f.y.size() != s.n_users()) throw std::invalid_argument("flow allocation size mismatch");
  const double mu = link_price(s.a, flow_load(f));
  const double yn = f.y(user);
  if (user == 0) {
    const double decoded = yn + std::min(f.z1, f.vN);
    const double sent = yn + f.z1 - (1.0 - s.beta) * std::min(f.z1, f.zN);
    return s.utilities[0].value(decoded) - f.v1 * link_price(s.side->a1, f.v1) - sent * mu;
  }
  if (user == s.last()) {
    const double decoded = yn + std::min(f.zN, f.v1);
    const double sent = yn + f.zN - (1.0 - s.beta) * std::min(f.z1, f.zN);
    return s.utilities[user].value(decoded) - f.vN * link_price(s.side->aN, f.vN) - sent * mu;
  }
  return s.utilities[user].value(yn) - yn * mu;
}

double payoff(Game game, const Scenario& s, int user, const Profile& profile) {
  if (game == Game::CostlySide) {
    const auto* f = std::get_if<FlowAllocation>(&profile);
    if (!f) throw std::invalid_argument("Game 3 payoffs take a FlowAllocation");
    return payoff(s, user, *f);
  }
  const auto* x = std::get_if<RateVector>(&profile);
  if (!x) throw std::invalid_argument("Games 1 and 2 take a RateVector");
  return payoff(game, s, user, *x);
}

double surplus(Game problem, const Scenario& s, const RateVector& x) {
  check_rates(s, x);
  double utility = 0.0;
  for (int n = 0; n < s.n_users(); ++n) utility += s.utilities[n].value(x(n));
  switch (problem) {
    case Game::Routing:
      return utility - link_cost(s.a, x.sum());
    case Game::Coding:
      return utility - link_cost(s.a, coded_load(s, x));
    case Game::CostlySide:
      throw std::invalid_argument("Problem 3 surplus takes a FlowAllocation");
  }
  throw std::invalid_argument("unknown problem");
}

double surplus(const Scenario& s, const FlowAllocation& f) {
  if (!s.side) throw std::invalid_argument("Problem 3 requires side-link slopes");
  if (f.y.size() != s.n_users()) throw std::invalid_argument("flow allocation size mismatch");
  const int last = s.last();
  double utility = 0.0;
  for (int n = 1; n < last; ++n) utility += s.utilities[n].value(f.y(n));
  utility += s.utilities[0].value(f.y(0) + std::min(f.z1, f.vN));
  utility += s.utilities[last].value(f.y(last) + std::min(f.zN, f.v1));
  return utility - link_cost(s.a, flow_load(f)) - link_cost(s.side->a1, f.v1) -
         link_cost(s.side->aN, f.vN);
}

double surplus(Game problem, const Scenario& s, const Profile& profile) {
  if (problem == Game::CostlySide) {
    const auto* f = std::get_if<FlowAllocation>(&profile);
    if (!f) throw std::invalid_argument("Problem 3 surplus takes a FlowAllocation");
    return surplus(s, *f);
  }
  const auto* x = std::get_if<RateVector>(&profile);
  if (!x) throw std::invalid_argument("Problems 1 and 2 take a RateVector");
  return surplus(problem, s, *x);
}

double coded_payments(const Scenario& s, const RateVector& x) {
  const double mu = link_price(s.a, coded_load(s, x));
  const double coded = std::min(x(0), x(s.last()));
  double units = routing_sum(s, x);
  units += x(0) - (1.0 - s.beta) * coded;
  units += x(s.last()) - (1.0 - s.beta) * coded;
  return units * mu;
}

double rate_bound(const Scenario& s) {
  double x = 1.0;
  const double slope = 0.5 * s.beta * s.a;
  auto exceeds = [&](double r) {
    for (const auto& u : s.utilities)
      if (u.marginal(r) >= slope * r) return true;
    return false;
  };
  while (exceeds(x) && x < 1e9) x *= 2.0;
  return x;
}

std::string to_string(Game g) {
  switch (g) {
    case Game::Routing: return "1";
    case Game::Coding: return "2";
    case Game::CostlySide: return "3";
  }
  return "?";
}

}  // namespace ncpoa
