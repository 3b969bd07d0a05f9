#include "ergolab/rate_fit.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ergolab/error.hpp"

namespace ergolab::correlations {

std::string_view model_name(RateModel model) noexcept {
  return model == RateModel::polynomial ? "polynomial" : "exponential";
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::InsufficientData, "line fit needs two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(Errc::InsufficientData, "line fit needs two distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    fit.rss += r * r;
  }
  return fit;
}

ModelFit fit_model(RateModel model, std::span<const double> x, std::span<const double> y) {
  std::vector<double> u, v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] == 0.0 || (model == RateModel::polynomial && x[i] <= 0.0)) continue;
    u.push_back(model == RateModel::polynomial ? std::log(x[i]) : x[i]);
    v.push_back(std::log(std::abs(y[i])));
  }
  ModelFit fit;
  fit.model = model;
  fit.rss = std::numeric_limits<double>::infinity();
  if (u.size() < 2) return fit;
  try {
    const LineFit line = fit_line(u, v);
    fit.exponent = -line.slope;
    fit.amplitude = std::exp(line.intercept);
    fit.rss = line.rss;
    fit.ok = std::isfinite(fit.exponent) && fit.exponent > 0.0;
  } catch (const Error&) {
  }
  return fit;
}

namespace {

RateFit fit_impl(std::span<const double> x, std::span<const double> y, const RateModel* forced) {
  if (x.size() != y.size()) throw Error(Errc::InsufficientData, "x and y differ in length");
  RateFit out;
  bool first = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] == 0.0) {
      ++out.zeros_dropped;
      continue;
    }
    ++out.points_used;
    out.x_min = first ? x[i] : std::min(out.x_min, x[i]);
    out.x_max = first ? x[i] : std::max(out.x_max, x[i]);
    first = false;
  }
  out.polynomial = fit_model(RateModel::polynomial, x, y);
  out.exponential = fit_model(RateModel::exponential, x, y);
  if (out.points_used == 0) {
    out.degenerate = true;
    return out;
  }
  if (!std::isfinite(out.exponential.rss))
    throw Error(Errc::InsufficientData, "fewer than two usable nonzero points");
  out.tie = std::abs(out.polynomial.rss - out.exponential.rss) <= kTieTolerance;
  RateModel pick = out.polynomial.rss < out.exponential.rss ? RateModel::polynomial : RateModel::exponential;
  if (out.tie) pick = RateModel::exponential;
  if (forced) pick = *forced;
  const ModelFit& chosen = pick == RateModel::polynomial ? out.polynomial : out.exponential;
  out.model = pick;
  out.exponent = chosen.exponent;
  out.amplitude = chosen.amplitude;
  out.rss = chosen.rss;
  return out;
}

}  // namespace

RateFit fit_rate(std::span<const double> x, std::span<const double> y) { return fit_impl(x, y, nullptr); }

RateFit fit_rate(std::span<const double> x, std::span<const double> y, RateModel forced) {
  return fit_impl(x, y, &forced);
}

}  // namespace ergolab::correlations
