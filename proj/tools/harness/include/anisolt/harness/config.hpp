#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisolt/covariance.hpp"

namespace anisolt::harness {

/// Malformed or unknown configuration; the CLI reports it as a usage error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string key;
  std::string default_value;
  std::string doc;
};

/// Experiment names in CLI order.
const std::vector<std::string>& experiments();
/// Every key an experiment accepts, with its default.
const std::vector<KeySpec>& schema(const std::string& experiment);

/// A fully resolved configuration: every schema key is present, either from
/// the file or from its default.
class RunConfig {
 public:
  RunConfig(std::string experiment, std::map<std::string, std::string> values);

  const std::string& experiment() const { return experiment_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  std::vector<long> int_list(const std::string& key) const;
  /// model.* and domain.* keys, as accepted by CovarianceModel::from_config.
  ModelConfig model_config() const;

  void set(const std::string& key, std::string value);
  /// Canonical "key = value" text, one line per key in key order.
  std::string canonical() const;

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

/// Parses "key = value" lines ('#' starts a comment). Unknown keys, duplicate
/// keys and lines without '=' are rejected. An `experiment` key, if present,
/// must name `experiment`.
RunConfig parse_config(const std::string& experiment, const std::string& text);

/// Human-readable key listing for --help output.
std::string describe_schema(const std::string& experiment);

}  // namespace anisolt::harness
