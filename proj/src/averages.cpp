#include "ergolab/averages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ergolab/parallel.hpp"
#include "ergolab/rate_fit.hpp"

namespace ergolab::averages {

using systems::Observable;
using systems::ShiftPoint;
using systems::ShiftSystem;
using systems::TorusAutomorphism;
using systems::TorusPoint;

namespace {

constexpr const char* kModule = "averages";

[[noreturn]] void domain(const std::string& what) { throw Error(Errc::DomainError, what, kModule); }

std::int64_t checked_product(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) domain("time m_i r_n overflows 64-bit integers");
  return out;
}

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

std::vector<std::int64_t> default_checkpoints(std::int64_t n_max) {
  std::vector<std::int64_t> out;
  for (std::int64_t n = 2; n <= n_max; n *= 2) {
    out.push_back(n);
    if (n > n_max / 2) break;
  }
  if (out.empty() || out.back() != n_max) out.push_back(n_max);
  return out;
}

void validate(const AverageSpec& spec) {
  const std::size_t l = spec.observables.size();
  if (l == 0) domain("an average needs at least one observable");
  if (spec.multipliers.size() != l) domain("one multiplier per observable expected");
  if (std::set<std::int64_t>(spec.multipliers.begin(), spec.multipliers.end()).size() != l)
    domain("multipliers must be pairwise distinct");
  for (std::int64_t m : spec.multipliers) {
    if (m == 0) domain("multipliers must be nonzero");
    if (m < 0 && !systems::system_invertible(spec.system))
      throw Error(Errc::VariantMismatch, "negative multiplier on a non-invertible system");
  }
  if (spec.n_max < 2) domain("N_max must be at least 2");
  for (std::size_t i = 0; i < spec.checkpoints.size(); ++i) {
    const std::int64_t c = spec.checkpoints[i];
    if (c < 2 || c > spec.n_max) domain("checkpoints must lie in [2, N_max]");
    if (i > 0 && c <= spec.checkpoints[i - 1]) domain("checkpoints must increase strictly");
  }
  for (const auto& f : spec.observables) systems::check_compatible(f, spec.system);
}

std::shared_ptr<const PreparedAverage> prepare(const AverageSpec& spec) {
  validate(spec);
  auto p = std::make_shared<PreparedAverage>();
  p->spec = spec;
  p->r = sequences::generate(spec.sequence, spec.n_max);
  p->checkpoints = spec.checkpoints.empty() ? default_checkpoints(spec.n_max) : spec.checkpoints;
  for (const auto& f : spec.observables) p->target *= systems::exact_mean(f, spec.system);
  const auto [rmin, rmax] = std::minmax_element(p->r.begin(), p->r.end());
  bool first = true;
  for (std::size_t i = 0; i < spec.observables.size(); ++i) {
    const std::int64_t a = checked_product(spec.multipliers[i], *rmin);
    const std::int64_t b = checked_product(spec.multipliers[i], *rmax);
    const int w = spec.observables[i].kind() == Observable::Kind::cylinder ? spec.observables[i].radius() : 0;
    const std::int64_t lo = std::min(a, b) - w;
    const std::int64_t hi = std::max(a, b) + w;
    p->window_lo = first ? lo : std::min(p->window_lo, lo);
    p->window_hi = first ? hi : std::max(p->window_hi, hi);
    first = false;
  }
  return p;
}

systems::Point sample_point(const PreparedAverage& prepared, Rng& rng) {
  if (const auto* shift = std::get_if<ShiftSystem>(&prepared.spec.system))
    return systems::sample_shift_window(*shift, prepared.window_lo, prepared.window_hi, rng);
  return systems::sample_torus_point(std::get<TorusAutomorphism>(prepared.spec.system), rng);
}

// ---------------------------------------------------------------------------

TermStream::TermStream(std::shared_ptr<const PreparedAverage> prepared, systems::Point point,
                       StreamOptions options)
    : prepared_(std::move(prepared)), point_(std::move(point)), options_(options) {
  const bool shift_system = std::holds_alternative<ShiftSystem>(prepared_->spec.system);
  if (shift_system != std::holds_alternative<ShiftPoint>(point_))
    throw Error(Errc::VariantMismatch, "point does not belong to the average's system");
}

double TermStream::shift_term(std::int64_t n) const {
  const auto& p = std::get<ShiftPoint>(point_);
  const auto view = p.view();
  const auto& spec = prepared_->spec;
  const std::int64_t rn = prepared_->r[static_cast<std::size_t>(n - 1)];
  double prod = 1.0;
  for (std::size_t i = 0; i < spec.observables.size(); ++i)
    prod *= spec.observables[i].value_at(view, p.origin() + spec.multipliers[i] * rn);
  return prod;
}

const systems::ModMatrix& TermStream::gap_power(std::int64_t exponent) {
  if (auto it = cache_.find(exponent); it != cache_.end()) return it->second;
  const auto& torus = std::get<TorusAutomorphism>(prepared_->spec.system);
  const std::size_t entry = sizeof(systems::u128) * static_cast<std::size_t>(torus.dimension() * torus.dimension());
  if ((cache_.size() + 1) * entry > options_.cache_bytes)
    throw Error(Errc::PrecisionBudget, "torus power cache exceeds " + std::to_string(options_.cache_bytes) + " bytes");
  return cache_.emplace(exponent, systems::mod_power(torus, exponent)).first->second;
}

double TermStream::torus_term() {
  const auto& torus = std::get<TorusAutomorphism>(prepared_->spec.system);
  const auto& spec = prepared_->spec;
  const std::int64_t n = position_ + 1;
  const std::int64_t rn = prepared_->r[static_cast<std::size_t>(n - 1)];
  if (current_.empty()) {
    const auto& x = std::get<TorusPoint>(point_);
    for (std::int64_t m : spec.multipliers)
      current_.push_back(systems::apply(systems::mod_power(torus, checked_product(m, rn)), x, torus.mask()));
  } else {
    const std::int64_t step = rn - prepared_->r[static_cast<std::size_t>(n - 2)];
    for (std::size_t i = 0; i < current_.size(); ++i) {
      const std::int64_t gap = checked_product(spec.multipliers[i], step);
      if (gap != 0) current_[i] = systems::apply(gap_power(gap), current_[i], torus.mask());
    }
  }
  double prod = 1.0;
  for (std::size_t i = 0; i < current_.size(); ++i) prod *= spec.observables[i].value_at(current_[i]);
  return prod;
}

void TermStream::next(std::span<double> out) {
  const auto limit = static_cast<std::int64_t>(prepared_->r.size());
  if (position_ + static_cast<std::int64_t>(out.size()) > limit)
    domain("term stream asked beyond N_max = " + std::to_string(limit));
  const bool shift_system = std::holds_alternative<ShiftPoint>(point_);
  for (double& v : out) {
    v = shift_system ? shift_term(position_ + 1) : torus_term();
    ++position_;
  }
}

// ---------------------------------------------------------------------------

AverageSeries ergodic_average_stream(const AverageSpec& spec, const systems::Point& point,
                                     const StreamOptions& options) {
  return ergodic_average_stream(prepare(spec), point, options);
}

AverageSeries ergodic_average_stream(std::shared_ptr<const PreparedAverage> prepared, const systems::Point& point,
                                     const StreamOptions& options) {
  AverageSeries series;
  series.target = prepared->target;
  const auto checkpoints = prepared->checkpoints;
  TermStream stream(std::move(prepared), point, options);
  std::vector<double> block(kSampleBlock);
  CompensatedSum raw;
  for (const std::int64_t cp : checkpoints) {
    while (stream.position() < cp) {
      const auto len = static_cast<std::size_t>(std::min<std::int64_t>(kSampleBlock, cp - stream.position()));
      stream.next(std::span<double>(block.data(), len));
      for (std::size_t i = 0; i < len; ++i) raw.add(block[i]);
    }
    const double N = static_cast<double>(cp);
    const double total = raw.value();
    series.rows.push_back({cp, total / N, std::fma(-N, series.target, raw.sum) + raw.carry});
  }
  return series;
}

double rho(std::int64_t N, double epsilon, double delta) {
  if (N < 2) domain("rho needs N >= 2");
  if (!(epsilon > 0.0) || !(delta > 0.0)) domain("rho needs epsilon > 0 and delta > 0");
  const double n = static_cast<double>(N);
  if (delta > 1.0) return std::pow(n, -0.5) * std::pow(std::log(n), 1.5 + epsilon);
  return std::pow(n, -delta / 2.0 + epsilon);
}

RateTable rate_statistic(const AverageSeries& series, double epsilon, double delta, double target,
                         std::int64_t N0) {
  RateTable table;
  std::vector<double> x, y;
  for (const auto& row : series.rows) {
    const double stat = std::abs(row.A - target) / rho(row.N, epsilon, delta);
    table.rows.push_back({row.N, stat});
    if (row.N < N0) continue;
    table.max_statistic = std::max(table.max_statistic, stat);
    if (stat > 0.0) {
      x.push_back(std::log(static_cast<double>(row.N)));
      y.push_back(std::log(stat));
    }
  }
  table.slope = std::numeric_limits<double>::quiet_NaN();
  if (x.size() >= 2) table.slope = correlations::fit_line(x, y).slope;
  return table;
}

EnsembleSummary ensemble_rate_experiment(const AverageSpec& spec, const EnsembleOptions& options) {
  if (options.points < 10) domain("an ensemble needs at least 10 points");
  const auto prepared = prepare(spec);
  EnsembleSummary out;
  out.checkpoints = prepared->checkpoints;
  out.target = prepared->target;
  out.reference_N = options.reference_N == 0 ? out.checkpoints.front() : options.reference_N;
  const auto ref_it = std::find(out.checkpoints.begin(), out.checkpoints.end(), out.reference_N);
  if (ref_it == out.checkpoints.end())
    domain("reference N = " + std::to_string(out.reference_N) + " is not a checkpoint");
  const auto ref = static_cast<std::size_t>(ref_it - out.checkpoints.begin());

  const auto count = static_cast<std::size_t>(options.points);
  out.series.resize(count);
  out.statistic.resize(count);
  out.point_seeds.resize(count);
  parallel_for(count, options.workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(options.seed, i);
    Rng rng(seed);
    const auto point = sample_point(*prepared, rng);
    out.point_seeds[i] = seed;
    out.series[i] = ergodic_average_stream(prepared, point, options.stream);
    const RateTable t = rate_statistic(out.series[i], options.epsilon, options.delta, prepared->target);
    for (const auto& row : t.rows) out.statistic[i].push_back(row.statistic);
  });

  const std::size_t cps = out.checkpoints.size();
  std::vector<double> column(count);
  for (std::size_t c = 0; c < cps; ++c) {
    std::size_t exceed = 0;
    for (std::size_t i = 0; i < count; ++i) {
      column[i] = out.statistic[i][c];
      if (out.statistic[i][c] > out.statistic[i][ref]) ++exceed;
    }
    out.fraction_exceeding.push_back(static_cast<double>(exceed) / static_cast<double>(count));
    std::sort(column.begin(), column.end());
    const double median =
        count % 2 == 1 ? column[count / 2] : 0.5 * (column[count / 2 - 1] + column[count / 2]);
    out.median_statistic.push_back(median);
  }
  return out;
}

}  // namespace ergolab::averages
