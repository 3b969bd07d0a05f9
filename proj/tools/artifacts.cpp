#include "artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <openssl/evp.h>

#include "ergolab/error.hpp"

namespace ergolab::cli {

Csv::Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

Csv& Csv::cell(double v) { return cell(format_double(v)); }

Csv& Csv::cell(std::int64_t v) { return cell(std::to_string(v)); }

Csv& Csv::cell(bool v) { return cell(std::string(v ? "true" : "false")); }

Csv& Csv::cell(const std::string& v) {
  if (in_row_ == columns_.size()) throw Error(Errc::InvalidConfig, "csv row wider than its header");
  out_ << (in_row_ ? "," : "") << v;
  ++in_row_;
  return *this;
}

void Csv::end_row() {
  if (in_row_ != columns_.size()) throw Error(Errc::InvalidConfig, "csv row narrower than its header");
  out_ << '\n';
  in_row_ = 0;
}

std::string join(const std::vector<std::int64_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ";" : "") + std::to_string(values[i]);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0, hi = 1.0;

  double map(double v) const { return log ? std::log10(v) : v; }
  double unmap(double v) const { return log ? std::pow(10.0, v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const Chart& chart) {
  const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 50;
  Axis ax{chart.log_x}, ay{chart.log_y};
  bool any = false;
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      const double x = ax.map(s.x[i]), y = ay.map(s.y[i]);
      if (!any) {
        ax.lo = ax.hi = x;
        ay.lo = ay.hi = y;
        any = true;
      }
      ax.lo = std::min(ax.lo, x), ax.hi = std::max(ax.hi, x);
      ay.lo = std::min(ay.lo, y), ay.hi = std::max(ay.hi, y);
    }
  if (ax.hi == ax.lo) ax.lo -= 0.5, ax.hi += 0.5;
  if (ay.hi == ay.lo) ay.lo -= 0.5, ay.hi += 0.5;
  const auto px = [&](double x) { return left + (ax.map(x) - ax.lo) / (ax.hi - ax.lo) * (W - left - right); };
  const auto py = [&](double y) { return H - bottom - (ay.map(y) - ay.lo) / (ay.hi - ay.lo) * (H - top - bottom); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(chart.title)
    << "</text>\n";
  o << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = ax.lo + (ax.hi - ax.lo) * t / 4.0;
    const double fy = ay.lo + (ay.hi - ay.lo) * t / 4.0;
    const double x = left + (W - left - right) * t / 4.0;
    const double y = H - bottom - (H - top - bottom) * t / 4.0;
    o << "<text x=\"" << fmt(x) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << label(ax.unmap(fx))
      << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << label(ay.unmap(fy))
      << "</text>\n";
  }
  o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << escape(chart.x_label) << (chart.log_x ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(16," << (top + H - bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(chart.y_label) << (chart.log_y ? " (log)" : "") << "</text>\n";
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      o << (first ? "" : " ") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - right - 4 << "\" y=\"" << top + 14 * (k + 1) << "\" text-anchor=\"end\" fill=\"" << color
      << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace ergolab::cli
