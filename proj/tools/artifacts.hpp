#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/format.hpp"

namespace ergolab::cli {

// Comma-separated rows with a header; floats with 17 significant digits.
class Csv {
 public:
  explicit Csv(std::vector<std::string> columns);

  Csv& cell(double v);
  Csv& cell(std::int64_t v);
  Csv& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  Csv& cell(std::size_t v) { return cell(static_cast<std::int64_t>(v)); }
  Csv& cell(bool v);
  Csv& cell(const std::string& v);
  Csv& cell(const char* v) { return cell(std::string(v)); }
  void end_row();

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::string str() const { return out_.str(); }

 private:
  std::vector<std::string> columns_;
  std::ostringstream out_;
  std::size_t in_row_ = 0;
};

// "0;3;7"
std::string join(const std::vector<std::int64_t>& values);

std::string sha256_hex(const std::string& bytes);
void write_file(const std::filesystem::path& path, const std::string& bytes);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

// Self-contained SVG line chart. Points that cannot be placed on a log axis
// are dropped.
std::string render_svg(const Chart& chart);

}  // namespace ergolab::cli
