#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "ergolab/sequences.hpp"
#include "ergolab/systems.hpp"

namespace ergolab::averages {

// (1/N) sum_{n <= N} f_1(h^{m_1 r_n} x) ... f_l(h^{m_l r_n} x).
struct AverageSpec {
  systems::System system;
  std::vector<systems::Observable> observables;
  std::vector<std::int64_t> multipliers;
  sequences::SequenceSpec sequence;
  std::int64_t n_max = 2;
  // Empty: powers of two from 2 up to n_max, plus n_max.
  std::vector<std::int64_t> checkpoints;
};

std::vector<std::int64_t> default_checkpoints(std::int64_t n_max);

// Throws DomainError (sizes, multipliers zero or repeated, n_max < 2, bad
// checkpoints), VariantMismatch (observable kind, negative multiplier on a
// non-invertible system).
void validate(const AverageSpec& spec);

struct StreamOptions {
  // Memory allowed for cached torus matrix powers.
  std::size_t cache_bytes = std::size_t{64} << 20;
};

// Spec with its sequence generated, target and checkpoints resolved.
struct PreparedAverage {
  AverageSpec spec;
  std::vector<std::int64_t> r;  // r_1..r_{n_max}
  std::vector<std::int64_t> checkpoints;
  double target = 1.0;  // prod mu(f_i)
  // Shift coordinates read by the average, relative to the point's origin.
  std::int64_t window_lo = 0;
  std::int64_t window_hi = 0;
};

std::shared_ptr<const PreparedAverage> prepare(const AverageSpec& spec);

// A point carrying exactly the coordinates the average needs.
systems::Point sample_point(const PreparedAverage& prepared, Rng& rng);

// Produces F_1, F_2, ... for one point in blocks.
class TermStream {
 public:
  TermStream(std::shared_ptr<const PreparedAverage> prepared, systems::Point point, StreamOptions options = {});

  // Fills out with F_{n+1}, ..., F_{n+out.size()} where n = position().
  void next(std::span<double> out);
  std::int64_t position() const noexcept { return position_; }

 private:
  double shift_term(std::int64_t n) const;
  double torus_term();
  const systems::ModMatrix& gap_power(std::int64_t exponent);

  std::shared_ptr<const PreparedAverage> prepared_;
  systems::Point point_;
  StreamOptions options_;
  std::int64_t position_ = 0;
  std::vector<systems::TorusPoint> current_;  // h^{m_i r_n} x per factor
  std::map<std::int64_t, systems::ModMatrix> cache_;
};

struct SeriesRow {
  std::int64_t N = 0;
  double A = 0.0;  // raw average
  double S = 0.0;  // sum_{n <= N} F_n - N * target
};

struct AverageSeries {
  double target = 0.0;
  std::vector<SeriesRow> rows;
};

AverageSeries ergodic_average_stream(const AverageSpec& spec, const systems::Point& point,
                                     const StreamOptions& options = {});
AverageSeries ergodic_average_stream(std::shared_ptr<const PreparedAverage> prepared, const systems::Point& point,
                                     const StreamOptions& options = {});

// N^{-1/2} (ln N)^{3/2 + eps} for delta > 1, N^{-delta/2 + eps} otherwise.
double rho(std::int64_t N, double epsilon, double delta);

struct RateRow {
  std::int64_t N = 0;
  double statistic = 0.0;  // |A_N - target| / rho(N)
};

struct RateTable {
  std::vector<RateRow> rows;
  double max_statistic = 0.0;  // over rows with N >= N0
  double slope = 0.0;          // log statistic against log N; NaN if undefined
};

RateTable rate_statistic(const AverageSeries& series, double epsilon, double delta, double target,
                         std::int64_t N0 = 0);

struct EnsembleOptions {
  std::int64_t points = 200;
  double epsilon = 1.0;
  double delta = 2.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  // Checkpoint whose statistic each point is compared against; 0 = first.
  std::int64_t reference_N = 0;
  StreamOptions stream;
};

struct EnsembleSummary {
  std::vector<std::int64_t> checkpoints;
  std::int64_t reference_N = 0;
  // Share of points whose statistic at the checkpoint exceeds their own value
  // at reference_N.
  std::vector<double> fraction_exceeding;
  std::vector<double> median_statistic;
  double target = 0.0;
  // statistic[point][checkpoint], series[point]
  std::vector<std::vector<double>> statistic;
  std::vector<AverageSeries> series;
  std::vector<std::uint64_t> point_seeds;
};

// Independent points from the invariant measure, one derived seed each.
EnsembleSummary ensemble_rate_experiment(const AverageSpec& spec, const EnsembleOptions& options);

}  // namespace ergolab::averages
