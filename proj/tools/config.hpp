#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergolab/sequences.hpp"
#include "ergolab/systems.hpp"

namespace ergolab::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

[[noreturn]] void invalid(const std::string& where, const std::string& what);

// Reads one JSON object; finish() rejects keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string path);

  bool has(const std::string& key) const;
  const json& required(const std::string& key);
  const json* optional(const std::string& key);
  std::string path_of(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  std::int64_t integer(const std::string& key);
  std::int64_t integer_or(const std::string& key, std::int64_t fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string_or(const std::string& key, std::string fallback);

  void finish() const;

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> seen_;
};

// JSON number, integer string or exact rational string "p/q".
double parse_number(const json& value, const std::string& path);
std::int64_t parse_integer(const json& value, const std::string& path);
std::vector<double> parse_numbers(const json& value, const std::string& path);
std::vector<std::int64_t> parse_integers(const json& value, const std::string& path);
std::vector<std::vector<double>> parse_matrix(const json& value, const std::string& path);
std::vector<std::vector<std::int64_t>> parse_tuples(const json& value, const std::string& path);

systems::System parse_system(const json& value, const std::string& path);
systems::Observable parse_observable(const json& value, const systems::System& system, const std::string& path);
sequences::SequenceSpec parse_sequence(const json& value, const std::string& path);

struct Config {
  std::string experiment;
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  std::optional<systems::System> system;
  std::vector<systems::Observable> observables;
  std::optional<sequences::SequenceSpec> sequence;
  json parameters = json::object();
  json raw;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"correlate", "cumulants", "average", "ratecheck",
                                              "dyadic",    "growth",    "counting"};
  return kinds;
}

// Parses the top level; experiment parameters are read by the experiment.
Config parse_config(const json& raw);
json load_json(const std::string& path);

}  // namespace ergolab::cli
