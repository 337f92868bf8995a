#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shocksim/ergodic.hpp"
#include "shocksim/model.hpp"

namespace shocksim::app {

using Json = nlohmann::ordered_json;

enum class Kind { PathDump, Bounds, Slln, Clt, CkTest, EProperty, Moments, Counterexample };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);
const std::vector<Kind>& all_kinds();

struct SemigroupSpec {
  std::string id = "ode";
  double rho = 1.0;
  std::size_t n = 32;
  double length = 1.0;
  double p = 3.0;
  double q = 2.0;
  double dt_max = 1e-3;
  double gamma = 1.0;
  std::vector<double> weight_breaks;
  std::vector<double> weight_values;
};

struct FunctionalSpec {
  std::string kind = "v-norm";  // or "coordinate"
  std::size_t index = 0;
  std::optional<std::pair<double, double>> clip;
  double shift = 0.0;
};

// A fully resolved experiment: every default filled in.  `params` and
// `tolerances` hold the kind-specific keys.
struct Config {
  Kind kind = Kind::PathDump;
  SemigroupSpec semigroup;
  ShockLawSpec shocks;
  double theta = 1.0;
  std::uint64_t seed = 1;
  double horizon = 10.0;
  std::size_t replicas = 1;
  double burn_in = 50.0;
  double quad_dt = 0.0;
  Json initial;  // null, number or array
  FunctionalSpec functional;
  Json params;
  Json tolerances;
};

// Throws ConfigError on unknown keys, bad types or out-of-range values.
Config parse_config(const Json& doc);
Config load_config(const std::filesystem::path& file);
Json to_json(const Config& cfg);

SemigroupPtr build_semigroup(const SemigroupSpec& spec);
Model build_model(const Config& cfg);
Functional build_functional(const FunctionalSpec& spec, const Semigroup& sg);
// null -> zero; a number a -> a (scalar) or a * profile (grid); an array -> coordinates.
StateVector build_state(const Json& spec, const Model& model);

struct Check {
  std::string name;
  double value;
  double limit;
  bool upper;  // value <= limit when true, value >= limit otherwise
  double margin() const { return upper ? value - limit : limit - value; }
  bool passed() const { return margin() <= 0.0; }
};

struct Outcome {
  Json results = Json::object();
  std::vector<Check> checks;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;

  bool passed() const;
  // The check with the largest margin, if any.
  const Check* worst() const;
};

Outcome run(const Config& cfg);

// Writes summary.json, data.csv and log.txt into dir.
void write_outputs(const Config& cfg, const Outcome& out, const std::filesystem::path& dir);

std::string format_double(double x);
std::string list_experiments();

// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace shocksim::app
