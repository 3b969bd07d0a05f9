#include "ergolab/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ergolab/error.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab::dyadic {

namespace {

constexpr const char* kModule = "dyadic";

[[noreturn]] void domain(const std::string& what) { throw Error(Errc::DomainError, what, kModule); }

void check_level(int s, int cap) {
  if (s < 1 || s > cap) domain("s must lie in [1, " + std::to_string(cap) + "], got " + std::to_string(s));
}

// Streaming pass over F_1..F_{2^s_max} of one row.
struct RowScan {
  std::vector<double> level_sq;  // completed blocks of level r, squared and summed
  std::vector<double> total_at;  // total_at[j - 1] = sum over L_j
};

RowScan scan_row(const BlockFiller& fill, int s_max) {
  RowScan out;
  out.level_sq.assign(static_cast<std::size_t>(s_max), 0.0);
  out.total_at.assign(static_cast<std::size_t>(s_max), 0.0);
  std::vector<double> running(static_cast<std::size_t>(s_max), 0.0);
  std::vector<double> block(kSampleBlock);
  const std::int64_t len = std::int64_t{1} << s_max;
  std::int64_t k = 0;
  while (k < len) {
    const auto n = static_cast<std::size_t>(std::min<std::int64_t>(kSampleBlock, len - k));
    fill(std::span<double>(block.data(), n));
    for (std::size_t i = 0; i < n; ++i) {
      ++k;
      for (int r = 0; r < s_max; ++r) {
        auto& run = running[static_cast<std::size_t>(r)];
        run += block[i];
        if ((k & ((std::int64_t{1} << r) - 1)) == 0) {
          out.level_sq[static_cast<std::size_t>(r)] += run * run;
          run = 0.0;
        }
      }
      if (std::has_single_bit(static_cast<std::uint64_t>(k)) && k >= 2) {
        const int j = std::countr_zero(static_cast<std::uint64_t>(k));
        double total = 0.0;
        for (int r = 0; r < j; ++r) total += out.level_sq[static_cast<std::size_t>(r)];
        out.total_at[static_cast<std::size_t>(j - 1)] = total;
      }
    }
  }
  return out;
}

std::vector<RowScan> scan_all(const TermEnsemble& terms, int s_max, unsigned workers) {
  std::vector<RowScan> rows(terms.points);
  parallel_for(terms.points, workers, [&](std::size_t i) { rows[i] = scan_row(terms.open(i), s_max); });
  return rows;
}

Estimate summarize(const std::vector<double>& values) {
  Estimate e;
  e.points = values.size();
  if (values.empty()) return e;
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  e.mean = mean;
  if (n > 1) e.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  return e;
}

ExceptionalReport exceptional_from(const std::vector<RowScan>& rows, int s, double epsilon, double sigma) {
  ExceptionalReport rep;
  rep.s = s;
  rep.epsilon = epsilon;
  rep.sigma = sigma;
  const double sd = static_cast<double>(s);
  const double scale = std::exp2(sigma * sd);
  rep.threshold = std::pow(sd, 2.0 + epsilon) * scale;
  std::vector<double> totals;
  totals.reserve(rows.size());
  std::size_t above = 0;
  for (const auto& row : rows) {
    const double t = row.total_at[static_cast<std::size_t>(s - 1)];
    totals.push_back(t);
    if (t > rep.threshold) ++above;
  }
  rep.fraction = rows.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(rows.size());
  rep.C = summarize(totals).mean / (sd * scale);
  rep.bound = rep.C * std::pow(sd, -1.0 - epsilon);
  // Markov's inequality holds exactly for the empirical measure.
  rep.pass = rep.fraction <= rep.bound * (1.0 + 1e-12);
  return rep;
}

void check_exponents(double epsilon, double sigma) {
  if (!(epsilon > 0.0) || !(sigma > 0.0)) domain("epsilon and sigma must be positive");
}

}  // namespace

int s_of(std::int64_t n) {
  if (n < 1) domain("s_of needs n >= 1");
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n)));
}

std::vector<DyadicInterval> decompose(std::int64_t n, int s) {
  check_level(s, 62);
  if (n < 1 || n >= (std::int64_t{1} << s))
    domain("decompose needs 1 <= n < 2^s, got n = " + std::to_string(n) + ", s = " + std::to_string(s));
  std::vector<DyadicInterval> out;
  std::int64_t start = 0;
  for (int r = s - 1; r >= 0; --r) {
    if ((n >> r & 1) == 0) continue;
    out.push_back({r, start >> r});
    start += std::int64_t{1} << r;
  }
  return out;
}

std::vector<DyadicInterval> dyadic_classes(int s) {
  check_level(s, 24);
  std::vector<DyadicInterval> out;
  for (int r = 0; r < s; ++r)
    for (std::int64_t i = 0; i < (std::int64_t{1} << (s - r)); ++i) out.push_back({r, i});
  return out;
}

TermEnsemble matrix_terms(std::vector<std::vector<double>> F) {
  auto rows = std::make_shared<const std::vector<std::vector<double>>>(std::move(F));
  TermEnsemble t;
  t.points = rows->size();
  t.open = [rows](std::size_t point) -> BlockFiller {
    return [rows, point, pos = std::size_t{0}](std::span<double> out) mutable {
      const auto& row = (*rows)[point];
      if (pos + out.size() > row.size())
        throw Error(Errc::ShapeMismatch, "row " + std::to_string(point) + " has " + std::to_string(row.size()) +
                                             " terms, needed " + std::to_string(pos + out.size()));
      std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(pos), out.size(), out.begin());
      pos += out.size();
    };
  };
  return t;
}

TermEnsemble average_terms(const averages::AverageSpec& spec, std::size_t points, std::uint64_t seed) {
  auto prepared = averages::prepare(spec);
  TermEnsemble t;
  t.points = points;
  t.open = [prepared, seed](std::size_t point) -> BlockFiller {
    Rng rng(derive_seed(seed, point));
    auto stream = std::make_shared<averages::TermStream>(prepared, averages::sample_point(*prepared, rng));
    const double target = prepared->target;
    return [stream, target](std::span<double> out) {
      stream->next(out);
      for (double& v : out) v -= target;
    };
  };
  return t;
}

VarianceProfile variance_profile(const TermEnsemble& terms, int s, unsigned workers) {
  check_level(s, 30);
  const auto rows = scan_all(terms, s, workers);
  VarianceProfile out;
  out.s = s;
  out.level_mean.assign(static_cast<std::size_t>(s), 0.0);
  for (const auto& row : rows) {
    out.totals.push_back(row.total_at.back());
    for (int r = 0; r < s; ++r) out.level_mean[static_cast<std::size_t>(r)] += row.level_sq[static_cast<std::size_t>(r)];
  }
  if (!rows.empty())
    for (double& v : out.level_mean) v /= static_cast<double>(rows.size());
  const Estimate e = summarize(out.totals);
  out.mean_total = e.mean;
  out.std_error = e.std_error;
  return out;
}

ExceptionalReport exceptional_fraction(const TermEnsemble& terms, int s, double epsilon, double sigma,
                                       unsigned workers) {
  check_level(s, 30);
  check_exponents(epsilon, sigma);
  return exceptional_from(scan_all(terms, s, workers), s, epsilon, sigma);
}

ExceptionalSeries exceptional_series(const TermEnsemble& terms, int s_max, double epsilon, double sigma,
                                     unsigned workers) {
  check_level(s_max, 30);
  check_exponents(epsilon, sigma);
  const auto rows = scan_all(terms, s_max, workers);
  ExceptionalSeries out;
  double running = 0.0;
  for (int s = 1; s <= s_max; ++s) {
    out.reports.push_back(exceptional_from(rows, s, epsilon, sigma));
    running += out.reports.back().fraction;
    out.partial_sum.push_back(running);
  }
  return out;
}

ChainReport chain_inequality_check(std::span<const double> F, std::int64_t n) {
  ChainReport rep;
  rep.s = s_of(n);
  if (rep.s > 30) domain("chain check supports n < 2^30");
  // sums[r][i]: sum over the level-r block with index i.
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(rep.s));
  auto& base = sums[0];
  base.assign(std::size_t{1} << rep.s, 0.0);
  std::copy_n(F.begin(), std::min(F.size(), base.size()), base.begin());
  for (int r = 1; r < rep.s; ++r) {
    const auto& prev = sums[static_cast<std::size_t>(r - 1)];
    auto& cur = sums[static_cast<std::size_t>(r)];
    cur.resize(prev.size() / 2);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = prev[2 * i] + prev[2 * i + 1];
  }
  double head = 0.0;
  for (std::int64_t k = 0; k < n; ++k) head += base[static_cast<std::size_t>(k)];
  rep.lhs = head * head;
  const double s = static_cast<double>(rep.s);
  double mid = 0.0;
  for (const auto& I : decompose(n, rep.s)) {
    const double v = sums[static_cast<std::size_t>(I.level)][static_cast<std::size_t>(I.index)];
    mid += v * v;
  }
  rep.mid = s * mid;
  double rhs = 0.0;
  for (const auto& level : sums)
    for (double v : level) rhs += v * v;
  rep.rhs = s * rhs;
  rep.pass = rep.lhs <= rep.mid * (1.0 + kChainTolerance) && rep.mid <= rep.rhs * (1.0 + kChainTolerance);
  return rep;
}

Estimate empirical_E(const TermEnsemble& terms, std::int64_t m, std::int64_t n, unsigned workers) {
  if (m < 0 || m >= n) domain("empirical_E needs 0 <= m < n");
  std::vector<double> values(terms.points);
  parallel_for(terms.points, workers, [&](std::size_t p) {
    BlockFiller fill = terms.open(p);
    std::vector<double> block(kSampleBlock);
    std::int64_t k = 0;
    double sum = 0.0;
    while (k < n) {
      const auto len = static_cast<std::size_t>(std::min<std::int64_t>(kSampleBlock, n - k));
      fill(std::span<double>(block.data(), len));
      for (std::size_t i = 0; i < len; ++i)
        if (++k > m) sum += block[i];
    }
    values[p] = sum * sum;
  });
  return summarize(values);
}

std::vector<Estimate> empirical_E_grid(const TermEnsemble& terms, std::span<const std::int64_t> N, unsigned workers) {
  for (std::size_t i = 0; i < N.size(); ++i)
    if (N[i] < 1 || (i > 0 && N[i] <= N[i - 1])) domain("grid must be positive and strictly increasing");
  if (N.empty()) return {};
  std::vector<std::vector<double>> squares(terms.points);
  parallel_for(terms.points, workers, [&](std::size_t p) {
    BlockFiller fill = terms.open(p);
    std::vector<double> block(kSampleBlock);
    auto& out = squares[p];
    std::int64_t k = 0;
    double sum = 0.0;
    for (const std::int64_t target : N) {
      while (k < target) {
        const auto len = static_cast<std::size_t>(std::min<std::int64_t>(kSampleBlock, target - k));
        fill(std::span<double>(block.data(), len));
        for (std::size_t i = 0; i < len; ++i) sum += block[i];
        k += static_cast<std::int64_t>(len);
      }
      out.push_back(sum * sum);
    }
  });
  std::vector<Estimate> out;
  std::vector<double> column(terms.points);
  for (std::size_t g = 0; g < N.size(); ++g) {
    for (std::size_t p = 0; p < terms.points; ++p) column[p] = squares[p][g];
    out.push_back(summarize(column));
  }
  return out;
}

SigmaFit sigma_fit(std::span<const std::int64_t> N, std::span<const double> E) {
  if (N.size() != E.size()) throw Error(Errc::InsufficientData, "N and E differ in length");
  if (N.size() < 4) throw Error(Errc::InsufficientData, "sigma fit needs at least 4 grid points");
  for (std::int64_t n : N)
    if (n < 1 || !std::has_single_bit(static_cast<std::uint64_t>(n))) domain("sigma fit needs dyadic N");
  std::vector<double> x(N.begin(), N.end());
  SigmaFit out;
  out.fit = correlations::fit_rate(x, E, correlations::RateModel::polynomial);
  out.sigma = out.fit.degenerate ? 0.0 : -out.fit.exponent;
  return out;
}

PowerGap power_gap_check(std::int64_t m, std::int64_t n, double epsilon) {
  if (m < 0 || m >= n) domain("power gap needs 0 <= m < n");
  if (!(epsilon > 0.0)) domain("epsilon must be positive");
  const double a = 1.0 + epsilon;
  const double nd = static_cast<double>(n);
  PowerGap out;
  out.lhs = std::pow(static_cast<double>(n - m), a);
  // n^a (1 - (m/n)^a) without cancellation for m close to n
  out.rhs = -std::pow(nd, a) * std::expm1(a * std::log1p(-static_cast<double>(n - m) / nd));
  out.pass = out.lhs <= out.rhs;
  return out;
}

double ks_ratio(std::int64_t n, double sigma, double epsilon) {
  if (n < 2) domain("ks ratio needs n >= 2");
  const double a = 1.5 + epsilon;
  const double s = static_cast<double>(s_of(n));
  const double nd = static_cast<double>(n);
  return std::exp(s * sigma / 2.0 * std::log(2.0) + a * std::log(s) - sigma / 2.0 * std::log(nd) -
                  a * std::log(std::log(nd)));
}

KsBound ks_ratio_bound(double sigma, double epsilon, std::int64_t n_max) {
  check_exponents(epsilon, sigma);
  if (n_max < 4) domain("ks ratio bound needs N_max >= 4");
  // Decreasing in n while s(n) is fixed, so only block starts 2^j compete.
  KsBound out;
  for (std::int64_t n = 2; n <= n_max; n *= 2) {
    const double r = ks_ratio(n, sigma, epsilon);
    if (r > out.max_ratio) out = {r, n};
    if (n > n_max / 2) break;
  }
  return out;
}

}  // namespace ergolab::dyadic
