#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ergolab/dyadic.hpp"
#include "test_util.hpp"

using namespace ergolab;
using namespace ergolab::dyadic;

namespace {

// Sum over every block of L_s, each summed term by term.
double brute_total(const std::vector<double>& F, int s) {
  double total = 0.0;
  for (int r = 0; r < s; ++r)
    for (std::int64_t i = 0; i < (std::int64_t{1} << (s - r)); ++i) {
      double v = 0.0;
      for (std::int64_t m = (i << r) + 1; m <= (i + 1) << r; ++m)
        v += m <= static_cast<std::int64_t>(F.size()) ? F[static_cast<std::size_t>(m - 1)] : 0.0;
      total += v * v;
    }
  return total;
}

std::vector<std::vector<double>> coin_matrix(std::size_t points, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> F(points, std::vector<double>(len));
  for (auto& row : F)
    for (auto& v : row) v = (rng() & 1U) ? 0.5 : -0.5;
  return F;
}

systems::ShiftSystem fair_coin() {
  const double probs[] = {0.5, 0.5};
  return systems::bernoulli_shift(probs);
}

systems::Observable centered_indicator(const systems::ShiftSystem& s, systems::Symbol sym, int offset = 0) {
  const auto f = systems::indicator(s, sym, offset);
  return f.plus_constant(-systems::exact_mean(f, s));
}

}  // namespace

TEST_CASE("s_of examples") {
  CHECK(s_of(1) == 1);
  CHECK(s_of(8) == 4);
  CHECK(s_of(13) == 4);
  CHECK(s_of(7) == 3);
  for (std::int64_t n = 1; n < 5000; ++n) {
    const int s = s_of(n);
    CHECK(n < (std::int64_t{1} << s));
    CHECK(n >= (std::int64_t{1} << (s - 1)));
  }
}

TEST_CASE("decompose examples") {
  const auto d13 = decompose(13, 4);
  REQUIRE(d13.size() == 3);
  CHECK(d13[0].first() == 1);
  CHECK(d13[0].last() == 8);
  CHECK(d13[1].first() == 9);
  CHECK(d13[1].last() == 12);
  CHECK(d13[2].first() == 13);
  CHECK(d13[2].last() == 13);
  const auto d8 = decompose(8, 4);
  REQUIRE(d8.size() == 1);
  CHECK(d8[0] == DyadicInterval{3, 0});
  CHECK(decompose(1, 1) == std::vector<DyadicInterval>{{0, 0}});
  CHECK(code_of([] { decompose(16, 4); }) == Errc::DomainError);
  CHECK(code_of([] { decompose(0, 4); }) == Errc::DomainError);
}

TEST_CASE("decompose partitions {1..n} exhaustively") {
  for (std::int64_t n = 1; n < 1024; ++n) {
    const int s = s_of(n);
    const auto blocks = decompose(n, s);
    CHECK(static_cast<int>(blocks.size()) <= s);
    const auto classes = dyadic_classes(s);
    const std::set<std::pair<int, std::int64_t>> members = [&] {
      std::set<std::pair<int, std::int64_t>> m;
      for (const auto& I : classes) m.insert({I.level, I.index});
      return m;
    }();
    std::vector<int> hits(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& I : blocks) {
      CHECK(I.level < s);
      CHECK(members.count({I.level, I.index}) == 1);
      CHECK(I.length() == I.last() - I.first() + 1);
      for (std::int64_t m = I.first(); m <= I.last(); ++m) {
        REQUIRE(m >= 1);
        REQUIRE(m <= n);
        ++hits[static_cast<std::size_t>(m)];
      }
    }
    for (std::int64_t m = 1; m <= n; ++m) CHECK(hits[static_cast<std::size_t>(m)] == 1);
  }
}

TEST_CASE("dyadic classes exclude the full range") {
  const auto L2 = dyadic_classes(2);
  CHECK(L2.size() == 6);
  for (const auto& I : L2) CHECK(I.length() < 4);
  const DyadicInterval I{2, 3};
  CHECK(I.first() == 13);
  CHECK(I.last() == 16);
  CHECK(I.contains(13));
  CHECK_FALSE(I.contains(12));
  CHECK_FALSE(I.contains(17));
}

TEST_CASE("variance profile examples") {
  auto zero = variance_profile(matrix_terms({std::vector<double>(8, 0.0)}), 3);
  CHECK(zero.mean_total == 0.0);
  for (double v : zero.level_mean) CHECK(v == 0.0);

  const auto ones = variance_profile(matrix_terms({std::vector<double>(4, 1.0)}), 2);
  CHECK(ones.mean_total == 12.0);
  REQUIRE(ones.level_mean.size() == 2);
  CHECK(ones.level_mean[0] == 4.0);
  CHECK(ones.level_mean[1] == 8.0);

  CHECK(code_of([] { variance_profile(matrix_terms({std::vector<double>(3, 1.0)}), 2); }) == Errc::ShapeMismatch);
}

TEST_CASE("variance profile matches brute-force enumeration") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int s = 1; s <= 7; ++s) {
    std::vector<std::vector<double>> F(5, std::vector<double>(std::size_t{1} << s));
    for (auto& row : F)
      for (auto& v : row) v = g(rng);
    const auto p = variance_profile(matrix_terms(F), s);
    for (std::size_t i = 0; i < F.size(); ++i) CHECK(p.totals[i] == doctest::Approx(brute_total(F[i], s)).epsilon(1e-12));
  }
}

TEST_CASE("variance profile of independent coins") {
  const int s = 8;
  const auto p = variance_profile(matrix_terms(coin_matrix(10000, 256, 4)), s, 4);
  const double expected = s * 256.0 / 4.0;
  CHECK(std::abs(p.mean_total / expected - 1.0) < 0.10);
  for (int r = 0; r < s; ++r) CHECK(p.level_mean[static_cast<std::size_t>(r)] == doctest::Approx(64.0).epsilon(0.1));
}

TEST_CASE("variance profile does not depend on worker count") {
  const auto F = coin_matrix(300, 64, 8);
  const auto a = variance_profile(matrix_terms(F), 6, 1);
  const auto b = variance_profile(matrix_terms(F), 6, 4);
  CHECK(a.totals == b.totals);
  CHECK(a.mean_total == b.mean_total);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("exceptional fraction") {
  const auto zero = exceptional_fraction(matrix_terms({std::vector<double>(16, 0.0)}), 4, 1.0, 1.0);
  CHECK(zero.fraction == 0.0);
  CHECK(zero.pass);

  const int s = 10;
  const auto coins = exceptional_fraction(matrix_terms(coin_matrix(2000, 1024, 5)), s, 1.0, 1.0);
  CHECK(coins.C == doctest::Approx(0.25).epsilon(0.1));
  CHECK(coins.bound == doctest::Approx(coins.C / 100.0));
  CHECK(coins.fraction <= coins.bound);
  CHECK(coins.pass);

  // Totals grow like s 4^s, far beyond s^{2+eps} 2^s.
  const auto det = exceptional_fraction(matrix_terms({std::vector<double>(std::size_t{1} << 14, 1.0)}), 14, 1.0, 1.0);
  CHECK(det.fraction == 1.0);
  CHECK(det.pass);
  const auto small = exceptional_fraction(matrix_terms({std::vector<double>(4, 1.0)}), 2, 1.0, 1.0);
  CHECK(small.fraction == 0.0);
}

TEST_CASE("exceptional series agrees with single levels") {
  const auto terms = matrix_terms(coin_matrix(200, 256, 6));
  const auto series = exceptional_series(terms, 8, 0.5, 1.0);
  REQUIRE(series.reports.size() == 8);
  double running = 0.0;
  for (int s = 1; s <= 8; ++s) {
    const auto single = exceptional_fraction(terms, s, 0.5, 1.0);
    const auto& rep = series.reports[static_cast<std::size_t>(s - 1)];
    CHECK(rep.fraction == single.fraction);
    CHECK(rep.C == doctest::Approx(single.C).epsilon(1e-12));
    CHECK(rep.pass);
    running += rep.fraction;
    CHECK(series.partial_sum[static_cast<std::size_t>(s - 1)] == doctest::Approx(running));
  }
}

TEST_CASE("chain inequality examples") {
  const std::vector<double> zero(10, 0.0);
  const auto z = chain_inequality_check(zero, 7);
  CHECK(z.lhs == 0.0);
  CHECK(z.mid == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.pass);

  // L(3) = {1,2},{3}; L_2 = {1},{2},{3},{4},{1,2},{3,4} with F_4 = 0.
  const std::vector<double> ones(3, 1.0);
  const auto c = chain_inequality_check(ones, 3);
  CHECK(c.s == 2);
  CHECK(c.lhs == 9.0);
  CHECK(c.mid == 10.0);
  CHECK(c.rhs == 16.0);
  CHECK(c.pass);
}

TEST_CASE("chain inequality holds for random Gaussian terms") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::int64_t> pick(1, 512);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::int64_t n = pick(rng);
    std::vector<double> F(static_cast<std::size_t>(n));
    for (auto& v : F) v = g(rng);
    const auto rep = chain_inequality_check(F, n);
    CHECK(rep.pass);
    CHECK(rep.s == s_of(n));
  }
}

TEST_CASE("empirical E examples") {
  CHECK(empirical_E(matrix_terms({std::vector<double>(8, 0.0)}), 0, 8).mean == 0.0);

  const std::size_t N = 512;
  const auto coins = matrix_terms(coin_matrix(10000, N, 9));
  const auto e = empirical_E(coins, 0, static_cast<std::int64_t>(N), 2);
  CHECK(std::abs(e.mean - N / 4.0) <= 4.0 * e.std_error);

  const auto part = empirical_E(coins, 100, 200);
  CHECK(std::abs(part.mean - 25.0) <= 4.0 * part.std_error);

  // Direct row sums.
  const auto F = coin_matrix(3, 16, 2);
  double mean = 0.0;
  for (const auto& row : F) {
    double s = 0.0;
    for (std::size_t k = 4; k < 11; ++k) s += row[k];
    mean += s * s / 3.0;
  }
  CHECK(empirical_E(matrix_terms(F), 4, 11).mean == doctest::Approx(mean));
  CHECK(code_of([&] { empirical_E(coins, 5, 5); }) == Errc::DomainError);
}

TEST_CASE("empirical E grid matches single evaluations") {
  const auto coins = matrix_terms(coin_matrix(50, 64, 12));
  const std::vector<std::int64_t> grid{1, 8, 16, 64};
  const auto g = empirical_E_grid(coins, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(g[i].mean == doctest::Approx(empirical_E(coins, 0, grid[i]).mean));
}

TEST_CASE("Markov-driven terms grow linearly") {
  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(2, 2);
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  const auto chain = systems::build_shift(a, p);
  const auto f = centered_indicator(chain, 1);
  const averages::AverageSpec spec{chain, {f}, {1}, sequences::SequenceSpec::linear(), 1024, {}};
  const auto terms = average_terms(spec, 4000, 17);
  const std::vector<std::int64_t> grid{16, 32, 64, 128, 256, 512, 1024};
  const auto E = empirical_E_grid(terms, grid, 4);
  std::vector<double> means;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    means.push_back(E[i].mean);
    CHECK(E[i].mean / static_cast<double>(grid[i]) <= 0.583);
  }
  const auto fit = sigma_fit(grid, means);
  CHECK(fit.sigma >= 0.85);
  CHECK(fit.sigma <= 1.15);
}

TEST_CASE("sigma fit examples") {
  std::vector<std::int64_t> grid;
  for (int j = 6; j <= 13; ++j) grid.push_back(std::int64_t{1} << j);

  std::vector<double> linear, square, decay;
  for (std::int64_t n : grid) {
    linear.push_back(static_cast<double>(n) / 4.0);
    square.push_back(static_cast<double>(n) * static_cast<double>(n));
    // sum_{j,k <= n} (|j - k| + 1)^{-1/2}
    double e = static_cast<double>(n);
    for (std::int64_t g = 1; g < n; ++g) e += 2.0 * static_cast<double>(n - g) / std::sqrt(static_cast<double>(g + 1));
    decay.push_back(e);
  }
  CHECK(sigma_fit(grid, linear).sigma == doctest::Approx(1.0));
  CHECK(sigma_fit(grid, square).sigma == doctest::Approx(2.0));
  CHECK(std::abs(sigma_fit(grid, decay).sigma - 1.5) <= 0.15);

  const auto coins = matrix_terms(coin_matrix(4000, 1024, 13));
  const std::vector<std::int64_t> small{64, 128, 256, 512, 1024};
  std::vector<double> E;
  for (const auto& e : empirical_E_grid(coins, small)) E.push_back(e.mean);
  const double s = sigma_fit(small, E).sigma;
  CHECK(s >= 0.9);
  CHECK(s <= 1.1);

  const std::vector<std::int64_t> three{2, 4, 8};
  const std::vector<double> three_e{1, 2, 3};
  CHECK(code_of([&] { sigma_fit(three, three_e); }) == Errc::InsufficientData);
  const std::vector<std::int64_t> odd{2, 4, 6, 8};
  const std::vector<double> odd_e{1, 2, 3, 4};
  CHECK(code_of([&] { sigma_fit(odd, odd_e); }) == Errc::DomainError);
}

TEST_CASE("power gap examples and sweep") {
  const auto p = power_gap_check(2, 4, 1.0);
  CHECK(p.lhs == doctest::Approx(4.0));
  CHECK(p.rhs == doctest::Approx(12.0));
  CHECK(p.pass);
  const auto z = power_gap_check(0, 77, 0.5);
  CHECK(z.lhs == z.rhs);
  CHECK(z.pass);

  std::mt19937_64 rng(41);
  std::uniform_int_distribution<std::int64_t> pick(1, 100000);
  const double eps[] = {0.25, 0.5, 1.0};
  for (int trial = 0; trial < 10000; ++trial) {
    const std::int64_t n = pick(rng);
    const std::int64_t m = std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng);
    const double e = eps[trial % 3];
    const auto r = power_gap_check(m, n, e);
    CHECK(r.pass);
    const double direct = std::pow(static_cast<double>(n), 1.0 + e) - std::pow(static_cast<double>(m), 1.0 + e);
    CHECK(r.rhs == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("ks ratio bound") {
  const auto b = ks_ratio_bound(1.0, 0.5, std::int64_t{1} << 20);
  CHECK(std::isfinite(b.max_ratio));
  CHECK(b.argmax < 64);
  // Brute-force sweep.
  double best = 0.0;
  std::int64_t arg = 0;
  for (std::int64_t n = 2; n <= (std::int64_t{1} << 20); ++n) {
    const double r = ks_ratio(n, 1.0, 0.5);
    if (r > best) {
      best = r;
      arg = n;
    }
  }
  CHECK(b.max_ratio == best);
  CHECK(b.argmax == arg);

  for (int s = 5; s < 40; ++s)
    CHECK(ks_ratio((std::int64_t{1} << (s + 1)) - 1, 1.0, 0.5) <= ks_ratio((std::int64_t{1} << s) - 1, 1.0, 0.5));

  CHECK(std::isfinite(ks_ratio_bound(2.0, 1.0, std::int64_t{1} << 20).max_ratio));

  // Crossing a block boundary multiplies the ratio by about 2^{sigma/2}.
  double prev_gap = 1e9;
  for (int s = 10; s <= 60; s += 10) {
    const std::int64_t n = std::int64_t{1} << s;
    const double q = ks_ratio(n, 1.0, 0.5) / ks_ratio(n - 1, 1.0, 0.5);
    const double gap = std::abs(q / std::sqrt(2.0) - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.05);
  CHECK(code_of([] { ks_ratio_bound(1.0, 0.5, 3); }) == Errc::DomainError);
}

TEST_CASE("dyadic domain errors carry their module") {
  try {
    decompose(4, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.qualified_code() == "dyadic.DomainError");
  }
}
