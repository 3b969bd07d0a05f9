#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ergolab/averages.hpp"
#include "ergolab/rate_fit.hpp"

namespace ergolab::dyadic {

// {m : index * 2^level < m <= (index + 1) * 2^level}
struct DyadicInterval {
  int level = 0;
  std::int64_t index = 0;

  std::int64_t first() const noexcept { return (index << level) + 1; }
  std::int64_t last() const noexcept { return (index + 1) << level; }
  std::int64_t length() const noexcept { return std::int64_t{1} << level; }
  bool contains(std::int64_t m) const noexcept { return m >= first() && m <= last(); }
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

inline constexpr int kMaxLevel = 40;

// Smallest s with n < 2^s.
int s_of(std::int64_t n);

// Blocks of L_s covering {1..n}, largest first. DomainError if n >= 2^s.
std::vector<DyadicInterval> decompose(std::int64_t n, int s);

// L_s: all blocks of level r < s inside {1..2^s}, ordered by level then index.
std::vector<DyadicInterval> dyadic_classes(int s);

// One row of terms F_1, F_2, ... per ensemble point, produced in consecutive
// blocks so a long row never has to be held in memory.
using BlockFiller = std::function<void(std::span<double>)>;

struct TermEnsemble {
  std::size_t points = 0;
  std::function<BlockFiller(std::size_t point)> open;
};

// Rows of an explicit matrix F[point][k - 1]. Reading past a row raises
// ShapeMismatch.
TermEnsemble matrix_terms(std::vector<std::vector<double>> F);

// F_n = f_1(h^{m_1 r_n} x) ... f_l(h^{m_l r_n} x) - target at points drawn
// from the invariant measure, point i seeded by derive_seed(seed, i).
TermEnsemble average_terms(const averages::AverageSpec& spec, std::size_t points, std::uint64_t seed);

struct VarianceProfile {
  int s = 0;
  std::vector<double> level_mean;  // ensemble mean of sum over L_{s,r}, r < s
  double mean_total = 0.0;
  double std_error = 0.0;
  std::vector<double> totals;  // per point
};

VarianceProfile variance_profile(const TermEnsemble& terms, int s, unsigned workers = 1);

struct ExceptionalReport {
  int s = 0;
  double epsilon = 0.0;
  double sigma = 0.0;
  double threshold = 0.0;  // s^{2+eps} 2^{sigma s}
  double fraction = 0.0;   // share of points above threshold
  double C = 0.0;          // mean total / (s 2^{sigma s})
  double bound = 0.0;      // C s^{-1-eps}
  bool pass = false;
};

ExceptionalReport exceptional_fraction(const TermEnsemble& terms, int s, double epsilon, double sigma,
                                       unsigned workers = 1);

// Reports for s = 1..s_max from one pass over each row, with the running sum
// of the fractions.
struct ExceptionalSeries {
  std::vector<ExceptionalReport> reports;
  std::vector<double> partial_sum;
};

ExceptionalSeries exceptional_series(const TermEnsemble& terms, int s_max, double epsilon, double sigma,
                                     unsigned workers = 1);

struct ChainReport {
  int s = 0;
  double lhs = 0.0;  // (sum_{k <= n} F_k)^2
  double mid = 0.0;  // s sum_{I in L(n)} (sum_I F)^2
  double rhs = 0.0;  // s sum_{I in L_s} (sum_I F)^2
  bool pass = false;
};

inline constexpr double kChainTolerance = 1e-9;

// Entries of F beyond its length count as zero.
ChainReport chain_inequality_check(std::span<const double> F, std::int64_t n);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

// Ensemble mean of (sum_{m < k <= n} F_k)^2.
Estimate empirical_E(const TermEnsemble& terms, std::int64_t m, std::int64_t n, unsigned workers = 1);

// empirical_E(0, N) for every N of an increasing grid, one pass per row.
std::vector<Estimate> empirical_E_grid(const TermEnsemble& terms, std::span<const std::int64_t> N,
                                       unsigned workers = 1);

struct SigmaFit {
  double sigma = 0.0;  // slope of log E against log N
  correlations::RateFit fit;  // polynomial model; exponent = -sigma
};

// Needs four or more dyadic N.
SigmaFit sigma_fit(std::span<const std::int64_t> N, std::span<const double> E);

struct PowerGap {
  double lhs = 0.0;  // (n - m)^{1+eps}
  double rhs = 0.0;  // n^{1+eps} - m^{1+eps}
  bool pass = false;
};

PowerGap power_gap_check(std::int64_t m, std::int64_t n, double epsilon);

// 2^{s(n) sigma/2} s(n)^{3/2+eps} / (n^{sigma/2} ln^{3/2+eps} n), n >= 2.
double ks_ratio(std::int64_t n, double sigma, double epsilon);

struct KsBound {
  double max_ratio = 0.0;
  std::int64_t argmax = 0;
};

KsBound ks_ratio_bound(double sigma, double epsilon, std::int64_t n_max);

}  // namespace ergolab::dyadic
