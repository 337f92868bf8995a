#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "shocksim/errors.hpp"

using namespace shocksim;
using app::Json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(SHOCKSIM_SOURCE_DIR) / "configs";

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "shocksim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = app::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "shocksim_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json minimal(const std::string& kind) {
  return {{"experiment", kind},
          {"semigroup", {{"id", "ode"}, {"rho", 1.0}}},
          {"shocks", {{"law", "gaussian"}, {"scale", 1.0}}},
          {"theta", 1.0},
          {"seed", 5}};
}

}  // namespace

TEST_CASE("list names every experiment") {
  const auto r = invoke({"--list"});
  CHECK(r.code == 0);
  for (auto k : app::all_kinds()) CHECK(r.out.find(app::to_string(k)) != std::string::npos);
  for (const char* s : {"ode", "plaplacian"}) CHECK(r.out.find(s) != std::string::npos);
}

TEST_CASE("kind names round-trip") {
  for (auto k : app::all_kinds()) CHECK(app::kind_from_string(app::to_string(k)) == k);
  CHECK_THROWS_AS(app::kind_from_string("spectral"), ConfigError);
}

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--bogus"}).code == 2);
  CHECK(invoke({"--config", (dir / "missing.json").string()}).code == 2);
  CHECK(invoke({"--config", write_config(dir, "{ not json").string()}).code == 2);

  Json unknown = minimal("path-dump");
  unknown["colour"] = "blue";
  auto r = invoke({"--config", write_config(dir, unknown.dump()).string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "summary.json"));

  CHECK(invoke({"--config", write_config(dir, minimal("spectral").dump()).string()}).code == 2);

  Json nested = minimal("path-dump");
  nested["semigroup"]["sigma"] = 1.0;
  CHECK(invoke({"--config", write_config(dir, nested.dump()).string()}).code == 2);

  Json bad_theta = minimal("path-dump");
  bad_theta["theta"] = -1.0;
  CHECK(invoke({"--config", write_config(dir, bad_theta.dump()).string()}).code == 2);

  Json unused = minimal("moments");
  unused["horizon"] = 5.0;
  CHECK(invoke({"--config", write_config(dir, unused.dump()).string()}).code == 2);

  CHECK(invoke({"--config", (kConfigs / "path_dump.json").string(), "--replicas-override", "10"}).code == 2);
}

TEST_CASE("config validation") {
  Json doc = minimal("bounds");
  doc["semigroup"] = {{"id", "plaplacian"}, {"n", 16}, {"p", 1.5}};
  CHECK_THROWS_AS(app::build_semigroup(app::parse_config(doc).semigroup), ConfigError);
  doc["semigroup"] = {{"id", "ode"}, {"rho", 0.0}};
  CHECK_THROWS_AS(app::parse_config(doc), ConfigError);
  doc = minimal("counterexample");
  CHECK_THROWS_AS(app::parse_config(doc), ConfigError);  // needs zero shocks
  doc["shocks"] = {{"law", "zero"}};
  CHECK_NOTHROW(app::parse_config(doc));
}

TEST_CASE("defaults are filled and echoed") {
  const auto cfg = app::parse_config(minimal("bounds"));
  CHECK(cfg.horizon == 100.0);
  CHECK(cfg.replicas == 100);
  CHECK(cfg.tolerances["bound"].get<double>() == 1e-9);
  const Json echo = app::to_json(cfg);
  CHECK(echo["experiment"] == "bounds");
  CHECK(echo["params"]["grid_points"] == 200);
  CHECK(echo["params"]["perturbation"].get<double>() == 0.1);
  // The echo reparses to the same config.
  CHECK(app::to_json(app::parse_config(echo)).dump() == echo.dump());

  const auto slln = app::parse_config(minimal("slln"));
  CHECK(slln.burn_in == 50.0);
}

TEST_CASE("path dump writes the three outputs") {
  const auto dir = scratch("path_dump");
  const auto r = invoke({"--config", (kConfigs / "path_dump.json").string(), "--out", dir.string(), "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  for (const char* f : {"summary.json", "data.csv", "log.txt"}) CHECK(fs::exists(dir / f));

  std::istringstream csv(slurp(dir / "data.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,residual_life,norm,x0");
  std::size_t rows = 0;
  double last = -1.0;
  while (std::getline(csv, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    CHECK(t > last);
    CHECK(t <= 10.0);
    last = t;
    ++rows;
  }
  const Json summary = Json::parse(slurp(dir / "summary.json"));
  CHECK(summary["results"]["points"].get<std::size_t>() == rows);
  CHECK(summary["passed"] == true);
  CHECK(summary["config"]["seed"] == 101);
}

TEST_CASE("overrides reach the run") {
  const auto a = scratch("override_a"), b = scratch("override_b");
  const auto cfg = (kConfigs / "path_dump.json").string();
  REQUIRE(invoke({"--config", cfg, "--out", a.string(), "--quiet"}).code == 0);
  REQUIRE(invoke({"--config", cfg, "--out", b.string(), "--quiet", "--seed-override", "77"}).code == 0);
  CHECK(Json::parse(slurp(b / "summary.json"))["config"]["seed"] == 77);
  CHECK(slurp(a / "data.csv") != slurp(b / "data.csv"));

  const auto m = scratch("override_m");
  REQUIRE(invoke({"--config", (kConfigs / "moments.json").string(), "--out", m.string(), "--quiet",
                  "--replicas-override", "2000"})
              .code != 2);
  CHECK(Json::parse(slurp(m / "summary.json"))["config"]["replicas"] == 2000);
}

TEST_CASE("reruns are byte-identical") {
  for (const char* name : {"path_dump", "bounds", "counterexample"}) {
    const auto a = scratch(std::string(name) + "_1"), b = scratch(std::string(name) + "_2");
    const auto cfg = (kConfigs / (std::string(name) + ".json")).string();
    const int c1 = invoke({"--config", cfg, "--out", a.string(), "--quiet"}).code;
    const int c2 = invoke({"--config", cfg, "--out", b.string(), "--quiet"}).code;
    CHECK(c1 == c2);
    for (const char* f : {"summary.json", "data.csv", "log.txt"}) CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("failing checks exit with 1 and name the worst check") {
  const auto dir = scratch("failing");
  const auto r = invoke({"--config", (kConfigs / "counterexample.json").string(), "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("check failed") != std::string::npos);
  const Json summary = Json::parse(slurp(dir / "summary.json"));
  CHECK(summary["passed"] == false);
  CHECK(summary["worst_check"].is_string());
}
