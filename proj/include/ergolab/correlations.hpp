#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ergolab/cumulants.hpp"
#include "ergolab/rate_fit.hpp"
#include "ergolab/systems.hpp"

namespace ergolab::correlations {

// Integral of f_0(h^{t_0} x) ... f_k(h^{t_k} x) with t_i = m_i n_i.
struct CorrelationQuery {
  systems::System system;
  std::vector<systems::Observable> observables;
  std::vector<std::int64_t> times;
  // Empty means all multipliers are 1.
  std::vector<std::int64_t> multipliers;

  std::vector<std::int64_t> effective_times() const;
};

// Sizes agree, at least one observable, times pairwise distinct, observables
// evaluable on the system, no negative time on a non-invertible system.
void validate(const CorrelationQuery& query);

struct McOptions {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

// Sample mean of the product over independent draws from the invariant
// measure. Blocks of kSampleBlock samples use their own derived seed, so the
// result is the same for every worker count.
McEstimate mc_correlation(const CorrelationQuery& query, const McOptions& options);

struct ExactOptions {
  std::int64_t span_limit = 1'000'000;
  // Largest number of transfer states m^(2w+1) allowed.
  std::int64_t state_limit = std::int64_t{1} << 22;
  // Bit budget for integer frequencies on the torus.
  std::int64_t frequency_bits = 1 << 16;
};

// Transfer-matrix sweep over [min t_i - w, max t_i + w]. Throws NotCylinder or
// SpanTooLarge.
double exact_correlation_shift(const CorrelationQuery& query, const ExactOptions& options = {});

// Character matching: a tuple of characters e(<k_i, x>) contributes iff
// sum_i (A^T)^{t_i} k_i = 0. Throws NotTrig or FrequencyOverflow.
double exact_correlation_torus(const CorrelationQuery& query, const ExactOptions& options = {});

// Exact oracle for the query's system kind.
double exact_correlation(const CorrelationQuery& query, const ExactOptions& options = {});

struct Defect {
  double value = 0.0;
  double correlation = 0.0;
  double product_of_means = 0.0;
  double std_error = 0.0;  // 0 when exact
  bool exact = true;
};

// |correlation - prod mu(f_i)|. Means default to the exact means. The exact
// oracle is used when it applies, Monte Carlo with `mc` otherwise.
Defect mixing_defect(const CorrelationQuery& query, std::optional<std::vector<double>> means = std::nullopt,
                     const McOptions& mc = {}, const ExactOptions& exact = {});

std::int64_t min_gap(std::span<const std::int64_t> times);

struct DecayRow {
  std::vector<std::int64_t> times;
  std::int64_t gap = 0;
  Defect defect;
};

struct DecayCheck {
  RateFit fit;
  std::vector<DecayRow> rows;
};

// Fits the defect against the minimal pairwise gap under both models. Tuples
// must have strictly increasing gaps; fewer than four give InsufficientData.
DecayCheck min_gap_decay_check(const systems::System& system,
                               const std::vector<systems::Observable>& observables,
                               const std::vector<std::vector<std::int64_t>>& tuples, const McOptions& mc = {},
                               const ExactOptions& exact = {});

// Exact joint moments of every subset of the query's observables.
CumulantTable joint_cumulants(const CorrelationQuery& query, const ExactOptions& options = {});

struct CumulantRow {
  std::vector<std::int64_t> times;
  std::int64_t spread = 0;  // max_t |n_t - n_0|
  double moment = 0.0;
  double cumulant = 0.0;
};

struct CumulantScan {
  RateFit fit;  // exponential model
  std::vector<CumulantRow> rows;
  std::vector<CumulantTable> tables;
};

// Full joint cumulant along each time tuple, fitted against its spread.
CumulantScan cumulant_decay_scan(const systems::ShiftSystem& system,
                                 const std::vector<systems::Observable>& observables,
                                 const std::vector<std::vector<std::int64_t>>& tuples,
                                 const ExactOptions& options = {});

// Coefficient of the L-infinity mixing bound for f followed by anything that
// only looks at coordinates >= q:  sum_j |E[(f - mu f) 1{x_q = j}]|.
double linf_mixing_coefficient(const systems::ShiftSystem& system, const systems::Observable& f, std::int64_t q,
                               const ExactOptions& options = {});

struct MultipleMixingCheck {
  double defect = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// Peels f_0 off the product: with G = prod_{i>=1} f_i o h^{t_i - t_1},
//   defect <= alpha_{f_0}(t_1 - w_1) prod_{i>=1} |f_i|_inf + |mu f_0| defect(f_1..f_k),
// recursively. Times must be increasing and start at 0.
MultipleMixingCheck multiple_mixing_check(const systems::ShiftSystem& system,
                                          const std::vector<systems::Observable>& observables,
                                          std::span<const std::int64_t> times, const ExactOptions& options = {});

}  // namespace ergolab::correlations
