#include "ergolab/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ergolab/format.hpp"

namespace ergolab::sequences {

SequenceSpec SequenceSpec::polynomial(std::vector<std::int64_t> ascending_coefficients) {
  SequenceSpec s;
  s.kind = SequenceKind::polynomial;
  s.coefficients = std::move(ascending_coefficients);
  while (s.coefficients.size() > 1 && s.coefficients.back() == 0) s.coefficients.pop_back();
  s.multiplicity_bound = std::max<std::int64_t>(1, static_cast<std::int64_t>(s.coefficients.size()) - 1);
  return s;
}

SequenceSpec SequenceSpec::primes() {
  SequenceSpec s;
  s.kind = SequenceKind::primes;
  return s;
}

SequenceSpec SequenceSpec::explicit_list(std::vector<std::int64_t> terms, std::int64_t claimed_bound) {
  SequenceSpec s;
  s.kind = SequenceKind::explicit_list;
  s.values = std::move(terms);
  s.multiplicity_bound = claimed_bound;
  return s;
}

std::string_view kind_name(SequenceKind kind) noexcept {
  switch (kind) {
    case SequenceKind::linear: return "linear";
    case SequenceKind::polynomial: return "polynomial";
    case SequenceKind::primes: return "primes";
    case SequenceKind::explicit_list: return "explicit";
  }
  return "unknown";
}

std::vector<std::int64_t> primes_up_to(std::int64_t limit) {
  std::vector<std::int64_t> out;
  if (limit < 2) return out;
  std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
  for (std::int64_t p = 2; p <= limit; ++p) {
    if (composite[static_cast<std::size_t>(p)]) continue;
    out.push_back(p);
    for (std::int64_t q = p * p; q <= limit; q += p) composite[static_cast<std::size_t>(q)] = true;
  }
  return out;
}

std::int64_t nth_prime_bound(std::int64_t N) {
  if (N < 6) return 15;
  const double n = static_cast<double>(N);
  return static_cast<std::int64_t>(std::ceil(n * (std::log(n) + std::log(std::log(n)))));
}

namespace {

std::int64_t eval_polynomial(const std::vector<std::int64_t>& c, std::int64_t n) {
  std::int64_t acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    if (__builtin_mul_overflow(acc, n, &acc) || __builtin_add_overflow(acc, *it, &acc))
      throw Error(Errc::DomainError, "polynomial term overflows 64-bit integers at n = " + std::to_string(n));
  }
  return acc;
}

}  // namespace

std::vector<std::int64_t> generate(const SequenceSpec& spec, std::int64_t N) {
  if (N < 1) throw Error(Errc::DomainError, "sequence length must be >= 1");
  std::vector<std::int64_t> r;
  r.reserve(static_cast<std::size_t>(N));
  switch (spec.kind) {
    case SequenceKind::linear:
      for (std::int64_t n = 1; n <= N; ++n) r.push_back(n);
      break;
    case SequenceKind::polynomial:
      if (spec.coefficients.empty()) throw Error(Errc::DomainError, "polynomial needs coefficients");
      for (std::int64_t n = 1; n <= N; ++n) r.push_back(eval_polynomial(spec.coefficients, n));
      break;
    case SequenceKind::primes: {
      std::int64_t bound = nth_prime_bound(N);
      auto primes = primes_up_to(bound);
      while (static_cast<std::int64_t>(primes.size()) < N) {
        bound *= 2;
        primes = primes_up_to(bound);
      }
      r.assign(primes.begin(), primes.begin() + N);
      break;
    }
    case SequenceKind::explicit_list:
      if (static_cast<std::int64_t>(spec.values.size()) < N)
        throw Error(Errc::DomainError, "explicit sequence holds " + std::to_string(spec.values.size()) +
                                           " terms, " + std::to_string(N) + " requested");
      r.assign(spec.values.begin(), spec.values.begin() + N);
      break;
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= 0)
      throw Error(Errc::NonPositiveTerm,
                  "r_" + std::to_string(i + 1) + " = " + std::to_string(r[i]) + " is not positive");
  }
  return r;
}

std::int64_t certified_multiplicity(const SequenceSpec& spec) {
  switch (spec.kind) {
    case SequenceKind::linear:
    case SequenceKind::primes:
      return 1;
    case SequenceKind::polynomial:
      return std::max<std::int64_t>(1, static_cast<std::int64_t>(spec.coefficients.size()) - 1);
    case SequenceKind::explicit_list: {
      if (spec.values.empty()) return 0;
      const std::int64_t m = multiplicity(spec.values);
      if (m > spec.multiplicity_bound)
        throw Error(Errc::DomainError, "explicit sequence repeats a value " + std::to_string(m) +
                                           " times, claimed bound is " +
                                           std::to_string(spec.multiplicity_bound));
      return m;
    }
  }
  return 0;
}

std::int64_t multiplicity(std::span<const std::int64_t> window) {
  std::vector<std::int64_t> v(window.begin(), window.end());
  std::sort(v.begin(), v.end());
  std::int64_t best = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    best = std::max<std::int64_t>(best, static_cast<std::int64_t>(j - i));
    i = j;
  }
  return best;
}

std::int64_t interval_count(std::span<const std::int64_t> window, double a, double b) {
  return std::count_if(window.begin(), window.end(), [&](std::int64_t r) {
    const double x = static_cast<double>(r);
    return x >= a && x <= b;
  });
}

// ---------------------------------------------------------------------------

std::string_view condition_name(Condition condition) noexcept {
  switch (condition) {
    case Condition::c_condition: return "c-condition";
    case Condition::b_row: return "b-row";
    case Condition::b_column: return "b-column";
    case Condition::band: return "band";
  }
  return "unknown";
}

namespace {

struct Witness {
  double M = 0.0;
  std::int64_t n = 0;
  std::int64_t count = 0;
};

double checked(double v, std::int64_t k) {
  if (std::isnan(v) || v < 1.0)
    throw Error(Errc::DomainError, "error scale at k = " + std::to_string(k) + " is below 1");
  return v;
}

// max over 1 <= n <= n_max of |{v <= n}| / n. Only n = ceil(v) can be a maximiser.
Witness witness_of(std::vector<double>& values, std::int64_t n_max) {
  std::sort(values.begin(), values.end());
  Witness w;
  std::int64_t last_n = -1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > static_cast<double>(n_max)) break;
    const auto n = static_cast<std::int64_t>(std::ceil(values[i]));
    if (n == last_n) continue;
    last_n = n;
    const auto count = static_cast<std::int64_t>(
        std::upper_bound(values.begin(), values.end(), static_cast<double>(n)) - values.begin());
    const double ratio = static_cast<double>(count) / static_cast<double>(n);
    if (ratio > w.M) w = {ratio, n, count};
  }
  return w;
}

template <class Fn>
std::vector<double> finite_values(const Fn& fn, std::int64_t k_begin, std::int64_t k_end) {
  std::vector<double> out;
  for (std::int64_t k = k_begin; k <= k_end; ++k) {
    const double v = checked(fn(k), k);
    if (!std::isinf(v)) out.push_back(v);
  }
  return out;
}

void finish(CountingReport& r) {
  r.pass = std::isfinite(r.witness_M) &&
           r.witness_M_doubled <= r.witness_M * (1.0 + kWitnessStability) &&
           static_cast<double>(r.worst_count) <= r.witness_M * static_cast<double>(r.worst_n) + 1e-9;
}

void validate_grid(std::int64_t K, std::int64_t n_max) {
  if (K < 1 || n_max < 1) throw Error(Errc::DomainError, "K and n_max must be >= 1");
}

}  // namespace

CountingReport check_c_condition(const CFunction& c, std::int64_t K, std::int64_t n_max) {
  validate_grid(K, n_max);
  auto values = finite_values(c, 1, K);
  auto extra = finite_values(c, K + 1, 2 * K);
  CountingReport r;
  r.condition = Condition::c_condition;
  r.K = K;
  r.n_max = n_max;
  r.grid_size = 1;
  auto doubled = values;
  doubled.insert(doubled.end(), extra.begin(), extra.end());
  const Witness w = witness_of(values, n_max);
  r.witness_M = w.M;
  r.worst_n = w.n;
  r.worst_count = w.count;
  r.witness_M_doubled = witness_of(doubled, n_max).M;
  finish(r);
  return r;
}

CountingReport check_b_condition(const BFunction& b, Orientation orientation,
                                 std::span<const std::int64_t> m_grid, std::int64_t K,
                                 std::int64_t n_max) {
  validate_grid(K, n_max);
  if (m_grid.empty()) throw Error(Errc::DomainError, "empty m grid");
  CountingReport r;
  r.condition = orientation == Orientation::row ? Condition::b_row : Condition::b_column;
  r.K = K;
  r.n_max = n_max;
  r.grid_size = static_cast<std::int64_t>(m_grid.size());
  for (const std::int64_t m : m_grid) {
    auto slice = [&](std::int64_t k) { return orientation == Orientation::row ? b(m, k) : b(k, m); };
    auto values = finite_values(slice, 1, K);
    auto doubled = values;
    auto extra = finite_values(slice, K + 1, 2 * K);
    doubled.insert(doubled.end(), extra.begin(), extra.end());
    const Witness w = witness_of(values, n_max);
    if (w.M > r.witness_M || r.worst_m == 0) {
      r.witness_M = w.M;
      r.worst_n = w.n;
      r.worst_m = m;
      r.worst_count = w.count;
    }
    r.witness_M_doubled = std::max(r.witness_M_doubled, witness_of(doubled, n_max).M);
  }
  finish(r);
  return r;
}

CountingReport check_b_condition_either(const BFunction& b, std::span<const std::int64_t> m_grid,
                                        std::int64_t K, std::int64_t n_max) {
  CountingReport row = check_b_condition(b, Orientation::row, m_grid, K, n_max);
  if (row.pass) return row;
  CountingReport column = check_b_condition(b, Orientation::column, m_grid, K, n_max);
  return column.pass ? column : row;
}

CountingReport check_band_condition(const CFunction& c, std::int64_t K, std::int64_t s_max,
                                    std::int64_t M_claim) {
  validate_grid(K, s_max);
  auto values = finite_values(c, 1, K);
  std::sort(values.begin(), values.end());
  CountingReport r;
  r.condition = Condition::band;
  r.K = K;
  r.n_max = s_max;
  r.grid_size = 1;
  for (std::int64_t s = 1; s <= s_max; ++s) {
    const auto lo = std::lower_bound(values.begin(), values.end(), static_cast<double>(s));
    const auto hi = std::upper_bound(values.begin(), values.end(), static_cast<double>(s + 1));
    const auto count = static_cast<std::int64_t>(hi - lo);
    if (count > r.worst_count || r.worst_n == 0) {
      r.worst_n = s;
      r.worst_count = count;
    }
  }
  r.witness_M = static_cast<double>(r.worst_count);
  r.witness_M_doubled = r.witness_M;
  r.pass = r.worst_count <= M_claim;
  return r;
}

BFunction sequence_b(std::vector<std::int64_t> r, double t_i, double t_j) {
  return [r = std::move(r), t_i, t_j](std::int64_t m, std::int64_t n) {
    if (m < 1 || n < 1 || m > static_cast<std::int64_t>(r.size()) ||
        n > static_cast<std::int64_t>(r.size()))
      throw Error(Errc::DomainError, "sequence index outside the generated range");
    const double a = t_i * static_cast<double>(r[static_cast<std::size_t>(m - 1)]);
    const double b = t_j * static_cast<double>(r[static_cast<std::size_t>(n - 1)]);
    return std::abs(a - b) + 1.0;
  };
}

CFunction sequence_c(std::vector<std::int64_t> r, double t_i, double t_j, bool same_index) {
  return [r = std::move(r), t_i, t_j, same_index](std::int64_t n) {
    if (n < 1 || n > static_cast<std::int64_t>(r.size()))
      throw Error(Errc::DomainError, "sequence index outside the generated range");
    const double rn = static_cast<double>(r[static_cast<std::size_t>(n - 1)]);
    return same_index ? std::abs(t_i * rn) + 1.0 : std::abs((t_i - t_j) * rn) + 1.0;
  };
}

std::string csv_header() { return "condition,witness_M,pass,worst_n,worst_m,worst_count"; }

std::string csv_row(const CountingReport& report) {
  std::ostringstream os;
  os << condition_name(report.condition) << ',' << format_double(report.witness_M) << ','
     << (report.pass ? "true" : "false") << ',' << report.worst_n << ',' << report.worst_m << ','
     << report.worst_count;
  return os.str();
}

}  // namespace ergolab::sequences
