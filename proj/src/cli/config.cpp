#include "ncpoa/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ncpoa::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

// Twelve significant digits removes the drift of lo + i * step.
double tidy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::stod(buf);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> commands() {
  return {"optimal", "nash", "efficiency", "poa-scan", "montecarlo", "sweep-side-cost", "worst-family"};
}

KeyValues parse_key_values(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
  }
  const bool embedded = std::any_of(lines.begin(), lines.end(),
                                    [](const std::string& l) { return l.rfind("#!", 0) == 0; });
  KeyValues out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (embedded) {
      if (line.rfind("#!", 0) != 0) continue;
      line = line.substr(2);
    } else if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(i + 1) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(i + 1) + ": empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      // A JSON result file: its "config" object holds the same pairs.
      const auto doc = nlohmann::json::parse(text, nullptr, false);
      if (doc.is_discarded() || !doc.contains("config") || !doc["config"].is_object())
        throw ConfigError("JSON input needs a \"config\" object");
      KeyValues out;
      for (const auto& [k, v] : doc["config"].items())
        out.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
      return out;
    }
    return parse_key_values(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply(ExperimentConfig& c, const KeyValues& pairs) {
  for (const auto& [key, v] : pairs) {
    if (key == "command") {
      const auto all = commands();
      if (std::find(all.begin(), all.end(), v) == all.end()) throw ConfigError("command: unknown '" + v + "'");
      c.command = v;
    } else if (key == "game") {
      const auto g = to_integer(key, v);
      if (g < 1 || g > 3) throw ConfigError("game: must be 1, 2 or 3");
      c.game = static_cast<int>(g);
    } else if (key == "utilities") {
      c.utilities = v;
    } else if (key == "a") {
      c.a = to_double(key, v);
    } else if (key == "beta") {
      c.beta = to_double(key, v);
    } else if (key == "a1") {
      c.a1 = v.empty() ? std::nullopt : std::optional<double>(to_double(key, v));
    } else if (key == "aN") {
      c.aN = v.empty() ? std::nullopt : std::optional<double>(to_double(key, v));
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_integer(key, v));
    } else if (key == "count") {
      const auto n = to_integer(key, v);
      if (n < 1) throw ConfigError("count: must be >= 1");
      c.count = static_cast<std::size_t>(n);
    } else if (key == "n") {
      c.n_users = v.empty() ? std::nullopt : std::optional<int>(static_cast<int>(to_integer(key, v)));
    } else if (key == "eps") {
      c.eps = to_double(key, v);
    } else if (key == "id") {
      c.family = v;
    } else if (key == "ratios") {
      c.ratios = v;
    } else if (key == "levels") {
      c.levels = v;
    } else if (key == "n-list") {
      c.n_list = v;
    } else if (key == "sides") {
      c.sides = v;
    } else if (key == "a-range") {
      c.a_range = v;
    } else if (key == "alpha-range") {
      c.alpha_range = v;
    } else if (key == "scale-range") {
      c.scale_range = v;
    } else if (key == "side-range") {
      c.side_range = v;
    } else if (key == "samples") {
      c.samples = static_cast<int>(to_integer(key, v));
    } else if (key == "damping") {
      c.damping = to_double(key, v);
    } else if (key == "max-iter") {
      c.max_iter = static_cast<int>(to_integer(key, v));
    } else if (key == "proximal") {
      c.proximal = to_double(key, v);
    } else if (key == "iter-tol") {
      c.iter_tol = to_double(key, v);
    } else if (key == "verify-tol") {
      c.verify_tol = to_double(key, v);
    } else if (key == "format") {
      if (v != "csv" && v != "json") throw ConfigError("format: must be csv or json");
      c.format = v;
    } else if (key == "timestamp") {
      c.timestamp = to_bool(key, v);
    } else if (key == "emit-scenario") {
      c.emit_scenario = v;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
}

KeyValues resolved(const ExperimentConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  KeyValues kv{
      {"command", c.command},
      {"game", std::to_string(c.game)},
      {"utilities", c.utilities},
      {"a", format_number(c.a)},
      {"beta", format_number(c.beta)},
      {"a1", opt(c.a1)},
      {"aN", opt(c.aN)},
      {"seed", std::to_string(c.seed)},
      {"count", std::to_string(c.count)},
      {"n", c.n_users ? std::to_string(*c.n_users) : std::string()},
      {"eps", format_number(c.eps)},
      {"id", c.family},
      {"ratios", c.ratios},
      {"levels", c.levels},
      {"n-list", c.n_list},
      {"sides", c.sides},
      {"a-range", c.a_range},
      {"alpha-range", c.alpha_range},
      {"scale-range", c.scale_range},
      {"side-range", c.side_range},
      {"samples", std::to_string(c.samples)},
      {"damping", format_number(c.damping)},
      {"max-iter", std::to_string(c.max_iter)},
      {"proximal", format_number(c.proximal)},
      {"iter-tol", format_number(c.iter_tol)},
      {"verify-tol", format_number(c.verify_tol)},
      {"format", c.format},
      {"timestamp", c.timestamp ? "true" : "false"},
  };
  if (!c.emit_scenario.empty()) kv.emplace_back("emit-scenario", c.emit_scenario);
  return kv;
}

UtilityFunction parse_utility(const std::string& token) {
  const auto parts = split(token, ':');
  if (parts.size() == 2 && parts[0] == "linear") return UtilityFunction::linear(to_double("utilities", parts[1]));
  if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "alpha") {
    const double scale = parts.size() == 3 ? to_double("utilities", parts[2]) : 1.0;
    return UtilityFunction::alpha_fair(to_double("utilities", parts[1]), scale);
  }
  throw ConfigError("utilities: bad entry '" + token + "' (use linear:G or alpha:A[:SCALE])");
}

std::string format_utilities(const Scenario& s) {
  std::string out;
  for (const auto& u : s.utilities) {
    if (!out.empty()) out += ',';
    if (u.is_linear()) {
      out += "linear:" + format_number(u.gamma());
    } else {
      const auto& af = std::get<AlphaFairUtility>(u.form());
      out += "alpha:" + format_number(af.alpha);
      if (af.scale != 1.0) out += ":" + format_number(af.scale);
    }
  }
  return out;
}

KeyValues scenario_pairs(const Scenario& s) {
  KeyValues kv{{"utilities", format_utilities(s)}, {"a", format_number(s.a)}, {"beta", format_number(s.beta)}};
  if (s.side) {
    kv.emplace_back("a1", format_number(s.side->a1));
    kv.emplace_back("aN", format_number(s.side->aN));
  }
  return kv;
}

Scenario build_scenario(const ExperimentConfig& c) {
  if (c.utilities.empty()) throw ConfigError("utilities: missing (use --linear, --alpha or --utilities)");
  Scenario s;
  for (const auto& tok : split(c.utilities, ',')) s.utilities.push_back(parse_utility(tok));
  s.a = c.a;
  s.beta = c.beta;
  if (c.a1 || c.aN) {
    if (!(c.a1 && c.aN)) throw ConfigError("a1 and aN must be given together");
    s.side = SideLinks{*c.a1, *c.aN};
  }
  const auto problems = validate_scenario(s);
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ConfigError(msg);
  }
  return s;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("grid '" + text + "': expected lo:hi:step");
    const double lo = to_double("grid", parts[0]);
    const double hi = to_double("grid", parts[1]);
    const double step = to_double("grid", parts[2]);
    if (!(step > 0.0) || hi < lo) throw ConfigError("grid '" + text + "': need step > 0 and hi >= lo");
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(tidy(lo + static_cast<double>(i) * step));
  } else {
    for (const auto& tok : split(text, ','))
      if (!tok.empty()) out.push_back(to_double("grid", tok));
  }
  if (out.empty()) throw ConfigError("grid '" + text + "' is empty");
  return out;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError("range '" + text + "': expected lo:hi");
  const double lo = to_double("range", parts[0]);
  const double hi = to_double("range", parts[1]);
  if (!(hi >= lo)) throw ConfigError("range '" + text + "': need hi >= lo");
  return {lo, hi};
}

}  // namespace ncpoa::cli
