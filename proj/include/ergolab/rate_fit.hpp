#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace ergolab::correlations {

enum class RateModel { polynomial, exponential };

std::string_view model_name(RateModel model) noexcept;

// y ~ amplitude * x^-exponent  or  y ~ amplitude * exp(-exponent x), fitted by
// least squares on log y.
struct ModelFit {
  RateModel model = RateModel::exponential;
  double exponent = 0.0;
  double amplitude = 0.0;
  double rss = 0.0;  // on log y
  bool ok = false;   // finite, positive exponent
};

struct RateFit {
  RateModel model = RateModel::exponential;
  double exponent = 0.0;
  double amplitude = 0.0;
  double rss = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::int64_t points_used = 0;
  std::int64_t zeros_dropped = 0;
  // Every defect was zero: amplitude 0, nothing to fit.
  bool degenerate = false;
  // Residuals agree within kTieTolerance; both fits below are meaningful.
  bool tie = false;
  ModelFit polynomial;
  ModelFit exponential;
};

inline constexpr double kTieTolerance = 1e-9;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
};

// Ordinary least squares y = slope x + intercept. Needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Fits |y| against x under one model. Zeros are skipped.
ModelFit fit_model(RateModel model, std::span<const double> x, std::span<const double> y);

// Fits both models and selects the smaller residual. Throws InsufficientData
// when exactly one nonzero point remains (or x is degenerate).
RateFit fit_rate(std::span<const double> x, std::span<const double> y);

// Fit restricted to one model; the other is still reported.
RateFit fit_rate(std::span<const double> x, std::span<const double> y, RateModel forced);

}  // namespace ergolab::correlations
