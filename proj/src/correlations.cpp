#include "ergolab/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <set>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "ergolab/parallel.hpp"

namespace ergolab::correlations {

using systems::Observable;
using systems::ShiftSystem;
using systems::TorusAutomorphism;
using BigInt = boost::multiprecision::cpp_int;

namespace {

constexpr const char* kModule = "correlations";

struct RunningMoments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const RunningMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

bool all_kind(const std::vector<Observable>& obs, Observable::Kind kind) {
  return std::all_of(obs.begin(), obs.end(), [&](const Observable& f) { return f.kind() == kind; });
}

std::pair<std::int64_t, std::int64_t> cylinder_span(const std::vector<Observable>& obs,
                                                    const std::vector<std::int64_t>& t) {
  std::int64_t lo = t[0] - obs[0].radius();
  std::int64_t hi = t[0] + obs[0].radius();
  for (std::size_t i = 1; i < obs.size(); ++i) {
    lo = std::min(lo, t[i] - obs[i].radius());
    hi = std::max(hi, t[i] + obs[i].radius());
  }
  return {lo, hi};
}

CorrelationQuery sub_query(const CorrelationQuery& q, SubsetMask mask) {
  CorrelationQuery out;
  out.system = q.system;
  const auto t = q.effective_times();
  for (std::size_t i = 0; i < q.observables.size(); ++i) {
    if (!(mask >> i & 1U)) continue;
    out.observables.push_back(q.observables[i]);
    out.times.push_back(t[i]);
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> CorrelationQuery::effective_times() const {
  if (multipliers.empty()) return times;
  if (multipliers.size() != times.size())
    throw Error(Errc::DomainError, "multipliers and times differ in length", kModule);
  std::vector<std::int64_t> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    if (__builtin_mul_overflow(multipliers[i], times[i], &out[i]))
      throw Error(Errc::DomainError, "effective time overflows", kModule);
  return out;
}

void validate(const CorrelationQuery& query) {
  if (query.observables.empty()) throw Error(Errc::DomainError, "query has no observables", kModule);
  if (query.observables.size() != query.times.size())
    throw Error(Errc::DomainError, "observables and times differ in length", kModule);
  if (std::set<std::int64_t>(query.times.begin(), query.times.end()).size() != query.times.size())
    throw Error(Errc::DomainError, "times must be pairwise distinct", kModule);
  for (const auto& f : query.observables) systems::check_compatible(f, query.system);
  const auto t = query.effective_times();
  if (!systems::system_invertible(query.system) &&
      std::any_of(t.begin(), t.end(), [](std::int64_t v) { return v < 0; }))
    throw Error(Errc::VariantMismatch, "negative time on a non-invertible system");
}

// ---------------------------------------------------------------------------

McEstimate mc_correlation(const CorrelationQuery& query, const McOptions& options) {
  validate(query);
  if (options.samples < 2) throw Error(Errc::DomainError, "Monte Carlo needs at least two samples", kModule);
  const auto t = query.effective_times();
  const auto samples = static_cast<std::size_t>(options.samples);
  const std::size_t blocks = block_count(samples);
  std::vector<RunningMoments> partial(blocks);

  if (const auto* shift = std::get_if<ShiftSystem>(&query.system)) {
    const auto [lo, hi] = cylinder_span(query.observables, t);
    const auto length = static_cast<std::size_t>(hi - lo + 1);
    parallel_for(blocks, options.workers, [&](std::size_t b) {
      Rng rng = make_rng(options.seed, b);
      std::vector<std::uint8_t> buffer(length);
      const systems::WindowView view{buffer.data(), lo, static_cast<std::int64_t>(length)};
      const std::size_t end = std::min(samples, (b + 1) * kSampleBlock);
      RunningMoments acc;
      for (std::size_t s = b * kSampleBlock; s < end; ++s) {
        systems::fill_window(*shift, lo, buffer, rng, lo);
        double prod = 1.0;
        for (std::size_t i = 0; i < t.size(); ++i) prod *= query.observables[i].value_at(view, t[i]);
        acc.add(prod);
      }
      partial[b] = acc;
    });
  } else {
    const auto& torus = std::get<TorusAutomorphism>(query.system);
    std::vector<systems::ModMatrix> powers;
    for (std::int64_t ti : t) powers.push_back(systems::mod_power(torus, ti));
    parallel_for(blocks, options.workers, [&](std::size_t b) {
      Rng rng = make_rng(options.seed, b);
      const std::size_t end = std::min(samples, (b + 1) * kSampleBlock);
      RunningMoments acc;
      for (std::size_t s = b * kSampleBlock; s < end; ++s) {
        const auto x = systems::sample_torus_point(torus, rng);
        double prod = 1.0;
        for (std::size_t i = 0; i < t.size(); ++i)
          prod *= query.observables[i].value_at(systems::apply(powers[i], x, torus.mask()));
        acc.add(prod);
      }
      partial[b] = acc;
    });
  }

  RunningMoments total;
  for (const auto& p : partial) total.merge(p);
  McEstimate out;
  out.estimate = total.mean;
  out.samples = total.n;
  const double variance = total.m2 / static_cast<double>(total.n - 1);
  out.std_error = std::sqrt(std::max(0.0, variance) / static_cast<double>(total.n));
  return out;
}

// ---------------------------------------------------------------------------

double exact_correlation_shift(const CorrelationQuery& query, const ExactOptions& options) {
  const auto* shift = std::get_if<ShiftSystem>(&query.system);
  if (!shift || !all_kind(query.observables, Observable::Kind::cylinder))
    throw Error(Errc::NotCylinder, "exact shift oracle needs cylinder observables on a shift");
  validate(query);
  const auto t = query.effective_times();
  const auto [lo, hi] = cylinder_span(query.observables, t);
  const std::int64_t span = hi - lo + 1;
  if (span > options.span_limit)
    throw Error(Errc::SpanTooLarge,
                "index span " + std::to_string(span) + " exceeds " + std::to_string(options.span_limit));

  int radius = 0;
  for (const auto& f : query.observables) radius = std::max(radius, f.radius());
  const int word = 2 * radius + 1;
  const auto m = static_cast<std::size_t>(shift->alphabet_size());
  std::size_t states = 1;
  for (int i = 0; i < word; ++i) {
    states *= m;
    if (states > static_cast<std::size_t>(options.state_limit))
      throw Error(Errc::SpanTooLarge, "transfer state space m^(2w+1) is too large");
  }
  std::vector<std::size_t> power(static_cast<std::size_t>(word) + 1, 1);
  for (int i = 1; i <= word; ++i) power[static_cast<std::size_t>(i)] = power[static_cast<std::size_t>(i - 1)] * m;

  // Initial word occupies [lo, lo + word - 1] and carries its stationary weight.
  std::vector<double> v(shift->stationary().data(), shift->stationary().data() + m);
  for (int len = 1; len < word; ++len) {
    std::vector<double> next(v.size() * m, 0.0);
    for (std::size_t idx = 0; idx < v.size(); ++idx) {
      if (v[idx] == 0.0) continue;
      const auto last = static_cast<Eigen::Index>(idx % m);
      for (std::size_t s = 0; s < m; ++s)
        next[idx * m + s] = v[idx] * shift->transition()(last, static_cast<Eigen::Index>(s));
    }
    v = std::move(next);
  }
  const std::int64_t p0 = lo + word - 1;

  // Each observable is applied once its window has been read.
  std::multimap<std::int64_t, std::size_t> events;
  for (std::size_t i = 0; i < t.size(); ++i)
    events.emplace(std::max(p0, t[i] + query.observables[i].radius()), i);

  auto apply_events = [&](std::int64_t p) {
    auto [first, last] = events.equal_range(p);
    for (auto it = first; it != last; ++it) {
      const Observable& f = query.observables[it->second];
      const std::int64_t end = t[it->second] + f.radius();
      const std::size_t div = power[static_cast<std::size_t>(p - end)];
      const std::size_t mod = power[static_cast<std::size_t>(2 * f.radius() + 1)];
      const auto& table = f.table();
      for (std::size_t st = 0; st < states; ++st)
        if (v[st] != 0.0) v[st] *= table[(st / div) % mod];
    }
  };

  apply_events(p0);
  const std::int64_t last_event = events.rbegin()->first;
  const std::size_t keep = states / m;
  std::vector<double> next(states);
  const auto& P = shift->transition();
  for (std::int64_t p = p0 + 1; p <= last_event; ++p) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t st = 0; st < states; ++st) {
      const double w = v[st];
      if (w == 0.0) continue;
      const auto from = static_cast<Eigen::Index>(st % m);
      const std::size_t base = (st % keep) * m;
      for (std::size_t s = 0; s < m; ++s) next[base + s] += w * P(from, static_cast<Eigen::Index>(s));
    }
    v.swap(next);
    apply_events(p);
  }
  double total = 0.0;
  for (double w : v) total += w;
  return total;
}

// ---------------------------------------------------------------------------

namespace {

using BigVec = std::vector<BigInt>;
using BigMat = std::vector<BigVec>;

BigMat big_multiply(const BigMat& a, const BigMat& b) {
  const std::size_t n = a.size();
  BigMat c(n, BigVec(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

void check_bits(const BigMat& m, std::int64_t budget) {
  for (const auto& row : m)
    for (const auto& x : row)
      if (x != 0 && static_cast<std::int64_t>(boost::multiprecision::msb(abs(x))) + 1 > budget)
        throw Error(Errc::FrequencyOverflow, "integer frequency exceeds the bit budget");
}

// (A^T)^e for e >= 0.
BigMat transpose_power(const systems::IntMatrix& a, std::int64_t e, std::int64_t budget) {
  const auto n = static_cast<std::size_t>(a.rows());
  BigMat base(n, BigVec(n));
  BigMat result(n, BigVec(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    result[i][i] = 1;
    for (std::size_t j = 0; j < n; ++j)
      base[i][j] = a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  }
  while (e > 0) {
    if (e & 1) {
      result = big_multiply(result, base);
      check_bits(result, budget);
    }
    e >>= 1;
    if (e > 0) {
      base = big_multiply(base, base);
      check_bits(base, budget);
    }
  }
  return result;
}

}  // namespace

double exact_correlation_torus(const CorrelationQuery& query, const ExactOptions& options) {
  const auto* torus = std::get_if<TorusAutomorphism>(&query.system);
  if (!torus || !all_kind(query.observables, Observable::Kind::trig))
    throw Error(Errc::NotTrig, "exact torus oracle needs trig observables on a torus");
  validate(query);
  auto t = query.effective_times();
  // Invariance of Haar measure lets every time be made non-negative.
  const std::int64_t shift = *std::min_element(t.begin(), t.end());
  for (auto& ti : t) ti -= shift;

  const auto d = static_cast<std::size_t>(torus->dimension());
  std::map<BigVec, std::complex<double>> acc;
  acc.emplace(BigVec(d, 0), 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const BigMat power = transpose_power(torus->matrix(), t[i], options.frequency_bits);
    std::vector<std::pair<BigVec, std::complex<double>>> chars;
    for (const auto& term : query.observables[i].terms()) {
      BigVec k(d, 0);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) k[r] += power[r][c] * term.frequency[c];
      const bool zero = std::all_of(k.begin(), k.end(), [](const BigInt& x) { return x == 0; });
      if (zero) {
        chars.emplace_back(k, term.cos_coef);
        continue;
      }
      BigVec neg(k);
      for (auto& x : neg) x = -x;
      chars.emplace_back(std::move(k), std::complex<double>(term.cos_coef, -term.sin_coef) * 0.5);
      chars.emplace_back(std::move(neg), std::complex<double>(term.cos_coef, term.sin_coef) * 0.5);
    }
    std::map<BigVec, std::complex<double>> next;
    for (const auto& [freq, coef] : acc)
      for (const auto& [k, c] : chars) {
        BigVec sum(freq);
        for (std::size_t r = 0; r < d; ++r) sum[r] += k[r];
        next[std::move(sum)] += coef * c;
      }
    acc = std::move(next);
  }
  const auto it = acc.find(BigVec(d, 0));
  return it == acc.end() ? 0.0 : it->second.real();
}

double exact_correlation(const CorrelationQuery& query, const ExactOptions& options) {
  if (std::holds_alternative<ShiftSystem>(query.system)) return exact_correlation_shift(query, options);
  return exact_correlation_torus(query, options);
}

// ---------------------------------------------------------------------------

Defect mixing_defect(const CorrelationQuery& query, std::optional<std::vector<double>> means,
                     const McOptions& mc, const ExactOptions& exact) {
  validate(query);
  if (!means) {
    means.emplace();
    for (const auto& f : query.observables) means->push_back(systems::exact_mean(f, query.system));
  }
  if (means->size() != query.observables.size())
    throw Error(Errc::DomainError, "one mean per observable expected", kModule);
  Defect out;
  out.product_of_means = 1.0;
  for (double mu : *means) out.product_of_means *= mu;
  try {
    out.correlation = exact_correlation(query, exact);
    out.exact = true;
  } catch (const Error& e) {
    if (e.code() != Errc::SpanTooLarge && e.code() != Errc::FrequencyOverflow) throw;
    const McEstimate est = mc_correlation(query, mc);
    out.correlation = est.estimate;
    out.std_error = est.std_error;
    out.exact = false;
  }
  out.value = std::abs(out.correlation - out.product_of_means);
  return out;
}

std::int64_t min_gap(std::span<const std::int64_t> times) {
  if (times.size() < 2) throw Error(Errc::DomainError, "a gap needs at least two times", kModule);
  std::vector<std::int64_t> s(times.begin(), times.end());
  std::sort(s.begin(), s.end());
  std::int64_t gap = s[1] - s[0];
  for (std::size_t i = 2; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
  return gap;
}

DecayCheck min_gap_decay_check(const systems::System& system, const std::vector<Observable>& observables,
                               const std::vector<std::vector<std::int64_t>>& tuples, const McOptions& mc,
                               const ExactOptions& exact) {
  if (tuples.size() < 4)
    throw Error(Errc::InsufficientData, "decay check needs at least four time tuples, got " +
                                            std::to_string(tuples.size()));
  DecayCheck out;
  std::vector<double> x, y;
  for (const auto& tuple : tuples) {
    CorrelationQuery q{system, observables, tuple, {}};
    DecayRow row;
    row.times = tuple;
    row.gap = min_gap(tuple);
    if (!out.rows.empty() && row.gap <= out.rows.back().gap)
      throw Error(Errc::DomainError, "minimal gaps must increase strictly along the tuples", kModule);
    row.defect = mixing_defect(q, std::nullopt, mc, exact);
    x.push_back(static_cast<double>(row.gap));
    y.push_back(row.defect.value);
    out.rows.push_back(std::move(row));
  }
  out.fit = fit_rate(x, y);
  return out;
}

CumulantTable joint_cumulants(const CorrelationQuery& query, const ExactOptions& options) {
  validate(query);
  const int k = static_cast<int>(query.observables.size()) - 1;
  if (k > kMaxCumulantIndex)
    throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " exceeds " + std::to_string(kMaxCumulantIndex));
  SubsetValues moments;
  const SubsetMask full = (SubsetMask{1} << (k + 1)) - 1;
  for (SubsetMask s = 1; s <= full; ++s) moments[s] = exact_correlation(sub_query(query, s), options);
  return moments_to_cumulants(k, moments);
}

CumulantScan cumulant_decay_scan(const ShiftSystem& system, const std::vector<Observable>& observables,
                                 const std::vector<std::vector<std::int64_t>>& tuples,
                                 const ExactOptions& options) {
  if (!all_kind(observables, Observable::Kind::cylinder))
    throw Error(Errc::NotCylinder, "cumulant scan needs cylinder observables");
  CumulantScan out;
  std::vector<double> x, y;
  for (const auto& tuple : tuples) {
    CorrelationQuery q{system, observables, tuple, {}};
    CumulantTable table = joint_cumulants(q, options);
    CumulantRow row;
    row.times = tuple;
    for (std::int64_t ti : tuple) row.spread = std::max(row.spread, std::abs(ti - tuple.front()));
    row.moment = table.moment_of(table.full());
    row.cumulant = table.cumulant_of(table.full());
    x.push_back(static_cast<double>(row.spread));
    y.push_back(row.cumulant);
    out.rows.push_back(std::move(row));
    out.tables.push_back(std::move(table));
  }
  out.fit = fit_rate(x, y, RateModel::exponential);
  return out;
}

double linf_mixing_coefficient(const ShiftSystem& system, const Observable& f, std::int64_t q,
                               const ExactOptions& options) {
  const double mean = systems::exact_mean(f, system);
  if (q <= f.radius()) return 2.0 * f.sup_norm();
  double alpha = 0.0;
  for (int j = 1; j <= system.alphabet_size(); ++j) {
    CorrelationQuery query{system, {f, systems::indicator(system, j)}, {0, q}, {}};
    const double joint = exact_correlation_shift(query, options);
    alpha += std::abs(joint - mean * system.stationary()(j - 1));
  }
  return alpha;
}

MultipleMixingCheck multiple_mixing_check(const ShiftSystem& system, const std::vector<Observable>& observables,
                                          std::span<const std::int64_t> times, const ExactOptions& options) {
  if (observables.size() != times.size() || observables.empty())
    throw Error(Errc::DomainError, "one time per observable expected", kModule);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1]) throw Error(Errc::DomainError, "times must increase", kModule);

  CorrelationQuery full{system, observables, {times.begin(), times.end()}, {}};
  std::vector<double> means;
  for (const auto& f : observables) means.push_back(systems::exact_mean(f, system));
  MultipleMixingCheck out;
  double product = 1.0;
  for (double mu : means) product *= mu;
  out.defect = std::abs(exact_correlation_shift(full, options) - product);

  // bound(i) covers the product f_i ... f_k.
  double bound = 0.0;
  for (std::size_t i = times.size() - 1; i-- > 0;) {
    std::int64_t start = times[i + 1] - observables[i + 1].radius();
    double rest_norm = 1.0;
    for (std::size_t j = i + 1; j < times.size(); ++j) {
      start = std::min(start, times[j] - observables[j].radius());
      rest_norm *= observables[j].sup_norm();
    }
    const double alpha = linf_mixing_coefficient(system, observables[i], start - times[i], options);
    bound = alpha * rest_norm + std::abs(means[i]) * bound;
  }
  out.bound = bound;
  out.holds = out.defect <= bound * (1.0 + 1e-12) + 1e-15;
  return out;
}

}  // namespace ergolab::correlations
