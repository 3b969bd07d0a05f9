#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "artifacts.hpp"
#include "config.hpp"

namespace ergolab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kInvalid = 2, kRuntime = 3 };

struct Outcome {
  json results = json::object();
  json columns = json::object();
  std::vector<std::pair<std::string, std::string>> files;
  std::int64_t steps = 0;
  bool svg = true;

  void add_csv(const std::string& name, const Csv& csv);
  void add_chart(const std::string& name, const Chart& chart);
};

// Everything checked and prepared; execute() only computes.
struct Plan {
  json derived = json::object();
  std::function<void(Outcome&, unsigned workers)> execute;
};

Plan make_plan(const Config& config);

struct RunOptions {
  std::optional<std::string> out;
  unsigned workers = 1;
  bool svg = true;
};

int run_command(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err);
int validate_command(const std::string& config_path, std::ostream& out);

// ERGOLAB_WORKERS wins over the flag. Throws InvalidConfig on junk.
unsigned resolve_workers(std::optional<unsigned> flag);

}  // namespace ergolab::cli
