#include "ncpoa/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

using namespace ncpoa;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ncpoa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string tok; std::getline(ss, tok, sep);) out.push_back(tok);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Data rows of an unquoted CSV body keyed by header; comment lines skipped.
std::vector<std::map<std::string, std::string>> rows(const std::string& csv) {
  std::stringstream ss(csv);
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> out;
  for (std::string line; std::getline(ss, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    out.push_back(row);
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ncpoa_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& body) {
  std::stringstream ss(body);
  std::string out;
  for (std::string line; std::getline(ss, line);)
    if (line.rfind("# generated", 0) != 0 && line.rfind("#! timestamp", 0) != 0) out += line + "\n";
  return out;
}

}  // namespace

TEST_CASE("grid and range parsing") {
  const auto g = cli::parse_grid("1:2:0.25");
  REQUIRE(g.size() == 5);
  CHECK(g.back() == 2.0);
  CHECK(cli::parse_grid("1:8:0.01").size() == 701);
  CHECK(cli::parse_grid("0.5,1,3") == std::vector<double>{0.5, 1, 3});
  CHECK_THROWS_AS(cli::parse_grid("1:0:0.1"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_grid("1:2:0"), cli::ConfigError);
  CHECK(cli::parse_range("0:10") == std::pair<double, double>{0, 10});
  CHECK_THROWS_AS(cli::parse_range("3:1"), cli::ConfigError);
}

TEST_CASE("utility tokens") {
  CHECK(cli::parse_utility("linear:2").gamma() == 2.0);
  CHECK(cli::parse_utility("alpha:0.5:2").value(4.0) == Approx(2 * 2.0 / 0.5));
  CHECK_THROWS_AS(cli::parse_utility("log:1"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_utility("linear:x"), cli::ConfigError);
}

TEST_CASE("key/value parsing and config precedence") {
  const auto kv = cli::parse_key_values("# comment\n a = 2 \nbeta=0.5\n\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"a", "2"});
  // Result files carry their config on "#!" lines; the table is ignored.
  const auto from_result = cli::parse_key_values("#! a = 3\n# generated x\ngame,kind\n2,point\n");
  REQUIRE(from_result.size() == 1);
  CHECK(from_result[0].second == "3");
  CHECK_THROWS_AS(cli::parse_key_values("novalue\n"), cli::ConfigError);

  cli::ExperimentConfig cfg;
  cli::apply(cfg, {{"a", "2"}, {"a", "5"}, {"beta", "0.5"}});
  CHECK(cfg.a == 5.0);
  CHECK(cfg.beta == 0.5);
  CHECK_THROWS_AS(cli::apply(cfg, {{"bogus", "1"}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::apply(cfg, {{"a", "two"}}), cli::ConfigError);
}

TEST_CASE("optimal for two linear users") {
  const auto r = invoke({"optimal", "--linear", "1,1", "--game", "2", "--no-timestamp"});
  CHECK(r.code == cli::kExitOk);
  const auto t = rows(r.out);
  REQUIRE(t.size() == 1);
  CHECK(std::stod(t[0].at("surplus")) == Approx(2.0));
  CHECK(t[0].at("profile") == "2;2");
}

TEST_CASE("nash reports the equal-rate segment and verifies it") {
  const auto r = invoke({"nash", "--linear", "1,1", "--beta", "0.5", "--no-timestamp"});
  CHECK(r.code == cli::kExitOk);
  const auto t = rows(r.out);
  REQUIRE(t.size() == 1);
  CHECK(t[0].at("kind") == "segment");
  CHECK(t[0].at("axis") == "equal-rates");
  CHECK(std::stod(t[0].at("lo")) == Approx(2.0 / 3));
  CHECK(std::stod(t[0].at("hi")) == Approx(2.0));
  CHECK(t[0].at("verified") == "true");
}

TEST_CASE("efficiency of the single-pricing worst case") {
  const auto r = invoke({"efficiency", "--linear", "2,1", "--beta", "1", "--no-timestamp"});
  CHECK(r.code == cli::kExitOk);
  const auto t = rows(r.out);
  REQUIRE(t.size() == 1);
  CHECK(std::stod(t[0].at("efficiency_min")) == Approx(1.0 / 3));
}

TEST_CASE("poa-scan marks the minimum row") {
  const auto r = invoke({"poa-scan", "--beta", "1", "--ratios", "1:3:0.5", "--no-timestamp"});
  CHECK(r.code == cli::kExitOk);
  const auto t = rows(r.out);
  REQUIRE(t.size() == 5);
  int marked = 0;
  for (const auto& row : t) {
    if (row.at("is_min") != "true") continue;
    ++marked;
    CHECK(std::stod(row.at("ratio")) == Approx(2.0));
    CHECK(std::stod(row.at("efficiency_min")) == Approx(1.0 / 3));
  }
  CHECK(marked == 1);
}

TEST_CASE("montecarlo output is reproducible for a fixed seed") {
  const std::vector<std::string> args{"montecarlo", "--game", "2", "--beta", "0.5", "--count", "12", "--seed", "9"};
  auto with_ts = args;
  with_ts.push_back("--no-timestamp");
  const auto a = invoke(with_ts);
  const auto b = invoke(with_ts);
  CHECK(a.code == cli::kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out.find("# generated") == std::string::npos);
  const auto c = invoke(args);
  CHECK(c.out.find("# generated") != std::string::npos);
  CHECK(strip_timestamp(c.out) == strip_timestamp(a.out));
  auto other = with_ts;
  other[8] = "10";
  CHECK(invoke(other).out != a.out);
}

TEST_CASE("a result file reproduces itself through --config") {
  const auto first = scratch("first.csv");
  auto r = invoke({"sweep-side-cost", "--sides", "0.01,1", "--n", "50", "--no-timestamp", "--out", first.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.empty());
  const auto second = scratch("second.csv");
  r = invoke({"--config", first.string(), "--out", second.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(slurp(first) == slurp(second));

  const auto json_out = scratch("first.json");
  r = invoke({"--config", first.string(), "--format", "json", "--out", json_out.string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto third = scratch("third.csv");
  r = invoke({"--config", json_out.string(), "--format", "csv", "--out", third.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(slurp(first) == slurp(third));
}

TEST_CASE("json output carries config, timestamp and rows") {
  const auto r = invoke({"efficiency", "--linear", "4,1", "--beta", "0.5", "--format", "json"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("config").at("command") == "efficiency");
  CHECK(j.at("generated").is_string());
  REQUIRE(j.at("rows").size() == 1);
  CHECK(j.at("rows")[0].at("efficiency_min").get<double>() == Approx(0.48));
  CHECK(j.at("rows")[0].at("converged").get<bool>());
}

TEST_CASE("worst-family writes a scenario that efficiency can replay") {
  const auto scen = scratch("family.scenario");
  auto r = invoke({"worst-family", "--id", "game2-general", "--n", "60", "--beta", "0.5", "--emit-scenario",
                   scen.string(), "--no-timestamp"});
  REQUIRE(r.code == cli::kExitOk);
  const auto fam = rows(r.out);
  REQUIRE(fam.size() == 1);
  r = invoke({"efficiency", "--scenario", scen.string(), "--no-timestamp"});
  REQUIRE(r.code == cli::kExitOk);
  const auto eff = rows(r.out);
  REQUIRE(eff.size() == 1);
  CHECK(eff[0].at("game") == "2");
  CHECK(std::stod(eff[0].at("efficiency_min")) == Approx(std::stod(fam[0].at("efficiency_min"))).epsilon(1e-8));
}

TEST_CASE("invalid input exits with code 1") {
  CHECK(invoke({"efficiency"}).code == cli::kExitInvalid);  // no utilities
  CHECK(invoke({"efficiency", "--linear", "1,-1"}).code == cli::kExitInvalid);
  CHECK(invoke({"efficiency", "--linear", "1,1", "--beta", "2"}).code == cli::kExitInvalid);
  CHECK(invoke({"efficiency", "--linear", "1,1", "--game", "3"}).code == cli::kExitInvalid);
  CHECK(invoke({"frobnicate"}).code == cli::kExitInvalid);
  CHECK(invoke({}).code == cli::kExitInvalid);
  CHECK(invoke({"worst-family", "--id", "nope"}).code == cli::kExitInvalid);
  CHECK(invoke({"nash", "--linear", "1,1", "--alpha", "0.5,0.5"}).code == cli::kExitInvalid);

  const auto bad = scratch("bad.cfg");
  std::ofstream(bad) << "command = nash\nutilities = linear:1,linear:1\ncolour = blue\n";
  const auto r = invoke({"--config", bad.string()});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(r.err.find("colour") != std::string::npos);

  const auto scen = scratch("bad.scenario");
  std::ofstream(scen) << "utilities = linear:1,linear:1\nseed = 3\n";
  CHECK(invoke({"efficiency", "--scenario", scen.string()}).code == cli::kExitInvalid);
}

TEST_CASE("unconverged iteration exits with code 2 and still writes rows") {
  const auto r = invoke({"nash", "--alpha", "0.5,0.5,0.5", "--max-iter", "2", "--no-timestamp"});
  CHECK(r.code == cli::kExitNoConvergence);
  const auto t = rows(r.out);
  REQUIRE(t.size() == 1);
  CHECK(t[0].at("converged") == "false");
}

TEST_CASE("the installed binary runs end to end") {
  const auto out = scratch("binary.csv");
  const std::string cmd = std::string(NCPOA_TOOL) + " efficiency --linear 2,1 --beta 1 --no-timestamp --out " +
                          out.string() + " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto t = rows(slurp(out));
  REQUIRE(t.size() == 1);
  CHECK(std::stod(t[0].at("efficiency_min")) == Approx(1.0 / 3));
  const std::string bad = std::string(NCPOA_TOOL) + " efficiency --linear 1 > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == cli::kExitInvalid);
}
