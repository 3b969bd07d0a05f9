#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergolab/error.hpp"

namespace ergolab::sequences {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class SequenceKind { linear, polynomial, primes, explicit_list };

struct SequenceSpec {
  SequenceKind kind = SequenceKind::linear;
  // Polynomial coefficients in ascending order: c0 + c1 n + c2 n^2 + ...
  std::vector<std::int64_t> coefficients;
  // Terms r_1, r_2, ... for explicit lists.
  std::vector<std::int64_t> values;
  // Claimed bound on how often any value repeats.
  std::int64_t multiplicity_bound = 1;

  static SequenceSpec linear() { return {}; }
  static SequenceSpec polynomial(std::vector<std::int64_t> ascending_coefficients);
  static SequenceSpec primes();
  static SequenceSpec explicit_list(std::vector<std::int64_t> terms, std::int64_t claimed_bound);
};

std::string_view kind_name(SequenceKind kind) noexcept;

// r_1..r_N. Throws NonPositiveTerm if a term is <= 0 and DomainError on
// overflow or when an explicit list is shorter than N.
std::vector<std::int64_t> generate(const SequenceSpec& spec, std::int64_t N);

// Primes <= limit by the sieve of Eratosthenes.
std::vector<std::int64_t> primes_up_to(std::int64_t limit);

// Sieve bound guaranteed to contain the N-th prime: N (ln N + ln ln N) for
// N >= 6, else 15.
std::int64_t nth_prime_bound(std::int64_t N);

// Multiplicity bound that holds for every N: 1 for linear and primes, the
// degree for polynomials (a degree-d polynomial takes each value at most d
// times), and the stored maximum for explicit lists. Throws DomainError when
// an explicit list violates its claimed bound.
std::int64_t certified_multiplicity(const SequenceSpec& spec);

std::int64_t multiplicity(std::span<const std::int64_t> window);

// Number of indices with a <= r_n <= b.
std::int64_t interval_count(std::span<const std::int64_t> window, double a, double b);

// ---------------------------------------------------------------------------
// Counting conditions on error scales b(m, k) and c(k) taking values in
// [1, inf]. kInfinity marks a term that contributes nothing.

enum class Condition { c_condition, b_row, b_column, band };
enum class Orientation { row, column };

std::string_view condition_name(Condition condition) noexcept;

struct CountingReport {
  Condition condition = Condition::c_condition;
  // max over the grid of |{k <= K : value(k) <= n}| / n (band: max band count).
  double witness_M = 0.0;
  bool pass = false;
  std::int64_t worst_n = 0;
  std::int64_t worst_m = 0;
  std::int64_t worst_count = 0;
  // Grid the statement was certified on.
  std::int64_t K = 0;
  std::int64_t n_max = 0;
  std::int64_t grid_size = 0;
  // Witness recomputed with k ranging up to 2K; a clustered scale shows up as
  // growth here.
  double witness_M_doubled = 0.0;
};

// Relative growth of the witness under K -> 2K tolerated by a pass.
inline constexpr double kWitnessStability = 0.10;

using CFunction = std::function<double(std::int64_t)>;
using BFunction = std::function<double(std::int64_t, std::int64_t)>;

// |{k : c(k) <= n}| <= M n for n <= n_max, k <= K.
CountingReport check_c_condition(const CFunction& c, std::int64_t K, std::int64_t n_max);

// Row: |{k : b(m, k) <= n}| <= M n for every m on the grid.
// Column: |{k : b(k, m) <= n}| <= M n for every m on the grid.
CountingReport check_b_condition(const BFunction& b, Orientation orientation,
                                 std::span<const std::int64_t> m_grid, std::int64_t K,
                                 std::int64_t n_max);

// Row orientation first, column as fallback.
CountingReport check_b_condition_either(const BFunction& b, std::span<const std::int64_t> m_grid,
                                        std::int64_t K, std::int64_t n_max);

// Every unit band [s, s+1], 1 <= s <= s_max, holds at most M_claim values c(k), k <= K.
CountingReport check_band_condition(const CFunction& c, std::int64_t K, std::int64_t s_max,
                                    std::int64_t M_claim);

// Error scales of the effective-decay setting for h_i = h^{t_i}:
//   b(m, n) = |t_i r_m - t_j r_n| + 1,
//   c(n)    = |t_i r_n - t_j r_n| + 1 (i != j),  |t_i r_n| + 1 (i == j).
// r holds r_1, r_2, ...; arguments beyond its length give DomainError.
BFunction sequence_b(std::vector<std::int64_t> r, double t_i, double t_j);
CFunction sequence_c(std::vector<std::int64_t> r, double t_i, double t_j, bool same_index);

std::string csv_header();
std::string csv_row(const CountingReport& report);

}  // namespace ergolab::sequences
