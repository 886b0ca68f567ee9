#include "anisolt/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace anisolt::harness {
namespace {

std::vector<KeySpec> common() {
  return {
      {"schema", "1", "configuration schema version (only 1 is defined)"},
      {"run.seed", "1", "master seed; every random draw derives from it"},
      {"run.threads", "1", "worker threads (results do not depend on it)"},
  };
}

std::vector<KeySpec> model_keys(const std::string& kind, const std::string& H, const std::string& lo,
                                const std::string& hi) {
  return {
      {"model.kind", kind, "fbm | she-white | she-riesz | transformed"},
      {"model.H", H, "fbm exponents, one per index axis"},
      {"model.beta", "1", "she-riesz noise exponent, 0 < beta < min(2, N)"},
      {"model.A", "1", "transformed: rows separated by ';', entries by ','"},
      {"model.inner", "fbm", "transformed: kind of the scalar inner model"},
      {"domain.lo", lo, "lower corner of the index domain"},
      {"domain.hi", hi, "upper corner of the index domain"},
  };
}

std::map<std::string, std::vector<KeySpec>> build() {
  std::map<std::string, std::vector<KeySpec>> s;
  auto add = [&](const std::string& name, std::vector<KeySpec> extra) {
    auto keys = common();
    keys.insert(keys.end(), extra.begin(), extra.end());
    s[name] = std::move(keys);
  };
  add("voronoi", {
                     {"voronoi.instances", "2000", "random star-shape instances"},
                     {"voronoi.max_generators", "20", "generators per instance drawn from 1..max"},
                     {"voronoi.dims", "1,2,3", "index dimensions drawn uniformly"},
                     {"voronoi.h_min", "0.1", "smallest exponent drawn"},
                     {"voronoi.h_max", "0.95", "largest exponent drawn"},
                     {"voronoi.partitions", "20", "rasterized partitions re-verified"},
                     {"voronoi.raster", "32", "raster cells per axis for those partitions"},
                 });
  add("covering", {
                      {"geometry.H", "0.5,0.5", "metric exponents"},
                      {"covering.n", "50,100,200", "configuration sizes"},
                      {"covering.trials", "1000", "configurations per size (every 4th adversarial)"},
                  });
  add("integral", {
                      {"geometry.H", "0.5,0.5", "metric exponents"},
                      {"integral.beta", "1,1.5", "singularity exponents (each < Q)"},
                      {"integral.m", "4,16,64", "numbers of random points"},
                      {"integral.sets", "4", "random point sets per m"},
                      {"integral.max_order", "12", "finest grid order"},
                      {"integral.rel_change", "0.005", "refinement stopping tolerance"},
                      {"integral.analytic_radius", "0.5", "radius of the unit-exponent ball check (0 disables)"},
                  });
  {
    auto keys = model_keys("she-white", "0.5", "1,-1", "2,1");
    keys.push_back({"slnd.configs", "1000", "random configurations"});
    keys.push_back({"slnd.n_max", "6", "conditioning points drawn from 1..n_max"});
    add("slnd", keys);
  }
  {
    auto keys = model_keys("fbm", "0.5", "0", "1");
    std::vector<KeySpec> extra{
        {"grid.points", "4096", "grid points per index axis"},
        {"grid.placement", "upper", "center | upper (point at the cell's upper corner)"},
        {"run.replicates", "2000", "sample paths"},
        {"localtime.bin", "0.01", "histogram bin width"},
        {"localtime.k", "10000", "smoothing parameter of L_k"},
        {"localtime.moments", "1,2", "moment orders for the scaling fit"},
        {"localtime.moment_radii", "1,0.5,0.25,0.125,0.0625,0.03125", "ball radii, decreasing"},
        {"localtime.moment_center", "0", "ball center (index point)"},
        {"localtime.moment_level", "0", "level x"},
        {"localtime.moment_replicates", "1000", "paths per radius (0 disables)"},
        {"localtime.moment_points", "1024", "grid points per axis per ball"},
        {"localtime.gauge_center", "0.5", "ball center for the gauge study"},
        {"localtime.gauge_radii", "0.125,0.0625,0.03125,0.015625,0.0078125,0.00390625,0.001953125",
         "nested radii, decreasing, below 1/e"},
        {"localtime.gauge_range", "4", "radii per compared range (first and last)"},
        {"localtime.gauge_replicates", "500", "paths (0 disables)"},
        {"localtime.gauge_points", "1024", "grid points per axis per ball"},
    };
    keys.insert(keys.end(), extra.begin(), extra.end());
    add("localtime", keys);
  }
  {
    auto keys = model_keys("fbm", "0.5", "0", "1");
    std::vector<KeySpec> extra{
        {"grid.points", "16384", "grid points per index axis"},
        {"grid.placement", "upper", "center | upper"},
        {"run.replicates", "100", "sample paths"},
        {"levelset.level", "0", "level x (one entry per component)"},
        {"levelset.orders", "2,3,4,5,6", "dyadic orders"},
        {"levelset.gauge_c", "1", "c in N_q phi(c 2^-q)"},
    };
    keys.insert(keys.end(), extra.begin(), extra.end());
    add("levelset", keys);
  }
  add("she-verify", {
                        {"she.N", "1", "spatial dimension"},
                        {"she.beta", "1", "noise exponent; N = 1 with beta = 1 is space-time white noise"},
                        {"she.t", "1", "time of the variance and increment evaluations"},
                        {"she.lags", "0.001,0.002,0.004,0.008,0.016,0.032,0.064,0.1", "increment lags"},
                    });
  return s;
}

const std::map<std::string, std::vector<KeySpec>>& all() {
  static const auto s = build();
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names{"voronoi", "covering", "integral", "slnd",
                                              "localtime", "levelset", "she-verify"};
  return names;
}

const std::vector<KeySpec>& schema(const std::string& experiment) {
  const auto it = all().find(experiment);
  if (it == all().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  return it->second;
}

RunConfig::RunConfig(std::string experiment, std::map<std::string, std::string> values)
    : experiment_(std::move(experiment)), values_(std::move(values)) {}

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("configuration has no key '" + key + "'");
  return it->second;
}

double RunConfig::num(const std::string& key) const {
  const auto v = list(key);
  if (v.size() != 1) throw ConfigError(key + ": expected a single number");
  return v[0];
}

long RunConfig::integer(const std::string& key) const {
  const auto v = int_list(key);
  if (v.size() != 1) throw ConfigError(key + ": expected a single integer");
  return v[0];
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& s = str(key);
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (s.empty() || s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + s + "'");
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = str(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::vector<double> RunConfig::list(const std::string& key) const {
  try {
    return parse_list(str(key));
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::vector<long> RunConfig::int_list(const std::string& key) const {
  std::vector<long> out;
  for (double v : list(key)) {
    if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key + ": expected integers");
    out.push_back(static_cast<long>(v));
  }
  return out;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  for (const auto& [k, v] : values_) {
    if (k.rfind("model.", 0) == 0 || k.rfind("domain.", 0) == 0) m[k] = v;
  }
  return m;
}

void RunConfig::set(const std::string& key, std::string value) {
  if (!values_.count(key)) throw ConfigError("configuration has no key '" + key + "'");
  values_[key] = std::move(value);
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "experiment = " << experiment_ << '\n';
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

RunConfig parse_config(const std::string& experiment, const std::string& text) {
  const auto& keys = schema(experiment);
  std::map<std::string, std::string> values;
  for (const auto& k : keys) values[k.key] = k.default_value;

  std::map<std::string, int> seen;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (seen.count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(seen[key]) + ")");
    }
    seen[key] = lineno;
    if (key == "experiment") {
      if (value != experiment) {
        throw ConfigError("config is for experiment '" + value + "', not '" + experiment + "'");
      }
      continue;
    }
    if (!values.count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "' for experiment '" +
                        experiment + "'");
    }
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    values[key] = value;
  }
  RunConfig cfg(experiment, std::move(values));
  if (cfg.str("schema") != "1") throw ConfigError("unsupported schema version '" + cfg.str("schema") + "'");
  return cfg;
}

std::string describe_schema(const std::string& experiment) {
  std::ostringstream os;
  for (const auto& k : schema(experiment)) {
    os << "  " << k.key << " = " << k.default_value << "\n      " << k.doc << '\n';
  }
  return os.str();
}

}  // namespace anisolt::harness
