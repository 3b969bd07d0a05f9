#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ergolab/correlations.hpp"
#include "test_util.hpp"

using namespace ergolab;
using namespace ergolab::systems;
using namespace ergolab::correlations;

namespace {

ShiftSystem markov_example(bool invertible = true) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(2, 2);
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  return build_shift(a, p, invertible);
}

ShiftSystem fair_coin(bool invertible = true) {
  const double probs[] = {0.5, 0.5};
  return bernoulli_shift(probs, invertible);
}

TorusAutomorphism cat_map() {
  IntMatrix m(2, 2);
  m << 2, 1, 1, 1;
  return build_torus(m);
}

Observable centered_indicator(const ShiftSystem& s, Symbol sym) {
  const Observable f = indicator(s, sym);
  return f.plus_constant(-exact_mean(f, s));
}

// Sum over every word on the span of its Markov weight times the product.
double brute_force(const ShiftSystem& s, const std::vector<Observable>& obs, const std::vector<std::int64_t>& t) {
  std::int64_t lo = t[0] - obs[0].radius(), hi = t[0] + obs[0].radius();
  for (std::size_t i = 0; i < t.size(); ++i) {
    lo = std::min(lo, t[i] - obs[i].radius());
    hi = std::max(hi, t[i] + obs[i].radius());
  }
  const auto len = static_cast<std::size_t>(hi - lo + 1);
  const int m = s.alphabet_size();
  std::vector<std::uint8_t> w(len, 0);
  double total = 0.0;
  for (;;) {
    double p = s.stationary()(w[0]);
    for (std::size_t i = 1; i < len && p > 0; ++i) p *= s.transition()(w[i - 1], w[i]);
    if (p > 0) {
      const WindowView view{w.data(), lo, static_cast<std::int64_t>(len)};
      double prod = 1.0;
      for (std::size_t i = 0; i < t.size(); ++i) prod *= obs[i].value_at(view, t[i]);
      total += p * prod;
    }
    std::size_t pos = 0;
    while (pos < len && ++w[pos] == m) w[pos++] = 0;
    if (pos == len) break;
  }
  return total;
}

Observable random_cylinder(const ShiftSystem& s, int radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t size = 1;
  for (int i = 0; i < 2 * radius + 1; ++i) size *= static_cast<std::size_t>(s.alphabet_size());
  std::vector<double> table(size);
  for (auto& v : table) v = u(rng);
  return Observable::cylinder(s.alphabet_size(), radius, table);
}

}  // namespace

TEST_CASE("Monte Carlo of a constant has zero error") {
  const auto s = fair_coin();
  CorrelationQuery q{s, {constant(s, 2.5)}, {0}, {}};
  const auto est = mc_correlation(q, {1000, 1, 1});
  CHECK(est.estimate == 2.5);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("Monte Carlo examples") {
  const auto coin = fair_coin();
  const auto f = centered_indicator(coin, 1);
  const auto est = mc_correlation({coin, {f, f}, {0, 5}, {}}, {1000000, 42, 1});
  CHECK(std::abs(est.estimate) <= 4 * est.std_error);

  const auto markov = markov_example();
  const auto g = centered_indicator(markov, 1);
  const auto est2 = mc_correlation({markov, {g, g}, {0, 1}, {}}, {1000000, 43, 1});
  CHECK(std::abs(est2.estimate - 1.0 / 18.0) <= 4 * est2.std_error);
}

TEST_CASE("Monte Carlo does not depend on the worker count") {
  const auto markov = markov_example();
  const auto g = centered_indicator(markov, 1);
  CorrelationQuery q{markov, {g, g, g}, {0, 2, 5}, {}};
  const auto a = mc_correlation(q, {50000, 7, 1});
  const auto b = mc_correlation(q, {50000, 7, 4});
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("exact shift oracle examples") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  CHECK(exact_correlation_shift({s, {one, one}, {0, 1}, {}}) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(exact_correlation_shift({s, {one, one}, {0, 2}, {}}) == doctest::Approx(5.0 / 6.0 * 0.86).epsilon(1e-14));

  const double probs[] = {0.2, 0.3, 0.5};
  const auto b = bernoulli_shift(probs);
  const Symbol w1[] = {1, 3};
  const Symbol w2[] = {2};
  const auto f = word_indicator(b, w1, 0);
  const auto g = word_indicator(b, w2, 0);
  CHECK(exact_correlation_shift({b, {f, g}, {0, 4}, {}}) == doctest::Approx(0.2 * 0.5 * 0.3).epsilon(1e-14));
}

TEST_CASE("exact shift oracle matches brute-force path sums") {
  std::mt19937_64 rng(17);
  const auto s = markov_example();
  Eigen::MatrixXi golden(2, 2);
  golden << 1, 1, 1, 0;
  Eigen::MatrixXd pg(2, 2);
  pg << 0.6, 0.4, 1.0, 0.0;
  const auto g = build_shift(golden, pg);
  for (const ShiftSystem* sys : {&s, &g})
    for (int trial = 0; trial < 30; ++trial) {
      std::uniform_int_distribution<int> k_pick(1, 3), r_pick(0, 1), t_pick(-4, 4);
      const int k = k_pick(rng);
      std::vector<Observable> obs;
      std::vector<std::int64_t> t;
      while (static_cast<int>(t.size()) < k) {
        const std::int64_t ti = t_pick(rng);
        if (std::find(t.begin(), t.end(), ti) != t.end()) continue;
        t.push_back(ti);
        obs.push_back(random_cylinder(*sys, r_pick(rng), rng));
      }
      CHECK(exact_correlation_shift({*sys, obs, t, {}}) == doctest::Approx(brute_force(*sys, obs, t)).epsilon(1e-12));
    }
}

TEST_CASE("exact shift oracle is translation invariant") {
  std::mt19937_64 rng(19);
  const auto s = markov_example();
  std::vector<Observable> obs{random_cylinder(s, 1, rng), random_cylinder(s, 0, rng), random_cylinder(s, 2, rng)};
  const double base = exact_correlation_shift({s, obs, {0, 3, 7}, {}});
  for (std::int64_t c : {-50, -1, 1, 1000})
    CHECK(exact_correlation_shift({s, obs, {c, 3 + c, 7 + c}, {}}) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("multipliers scale the times") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  CorrelationQuery q{s, {one, one}, {0, 1}, {1, 2}};
  CHECK(exact_correlation_shift(q) == doctest::Approx(5.0 / 6.0 * 0.86));
}

TEST_CASE("exact shift oracle errors") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  CHECK(code_of([&] { exact_correlation_shift({s, {one, one}, {0, 2000000}, {}}); }) == Errc::SpanTooLarge);
  CHECK(code_of([&] { exact_correlation_shift({cat_map(), {character({1, 0}, 1, 0)}, {0}, {}}); }) ==
        Errc::NotCylinder);
  CHECK(code_of([&] { exact_correlation_shift({s, {one, one}, {3, 3}, {}}); }) == Errc::DomainError);
  const auto one_sided = markov_example(false);
  CHECK(code_of([&] { exact_correlation_shift({one_sided, {one, one}, {-1, 3}, {}}); }) == Errc::VariantMismatch);
  CHECK(code_of([&] { mc_correlation({s, {character({1, 0}, 1, 0)}, {0}, {}}, {100, 1, 1}); }) ==
        Errc::VariantMismatch);
}

TEST_CASE("exact torus oracle examples") {
  const auto cat = cat_map();
  const auto f0 = character({-2, -1}, 1, 0);
  const auto f1 = character({1, 0}, 1, 0);
  CHECK(exact_correlation_torus({cat, {f0, f1}, {0, 1}, {}}) == doctest::Approx(0.5));
  CHECK(exact_correlation_torus({cat, {character({3, -1}, 0.7, 0.2)}, {5}, {}}) == 0.0);
  const auto unit = Observable::trig(2, {TrigTerm{{0, 0}, 1.0, 0.0}});
  CHECK(exact_correlation_torus({cat, {unit, unit, unit}, {0, 1, 2}, {}}) == doctest::Approx(1.0));
  CHECK(code_of([&] { exact_correlation_torus({markov_example(), {indicator(markov_example(), 1)}, {0}, {}}); }) ==
        Errc::NotTrig);
}

TEST_CASE("torus oracle: sin pairing and conjugation symmetry") {
  const auto cat = cat_map();
  // sin(2 pi <(-2,-1), x>) * sin(2 pi <(1,0), Lx>) = -sin^2 on the matched frequency.
  const auto s0 = character({-2, -1}, 0, 1);
  const auto s1 = character({1, 0}, 0, 1);
  CHECK(exact_correlation_torus({cat, {s0, s1}, {0, 1}, {}}) == doctest::Approx(-0.5));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> c(-1, 1);
  const std::vector<std::vector<std::int64_t>> fa{{-2, -1}, {1, 1}, {0, 0}, {3, 2}};
  const std::vector<std::vector<std::int64_t>> fb{{1, 0}, {0, 1}, {-1, 1}, {2, 2}};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrigTerm> a, b, a_conj, b_conj;
    for (std::size_t j = 0; j < fa.size(); ++j) {
      a.push_back({fa[j], c(rng), 0.0});
      b.push_back({fb[j], c(rng), 0.0});
    }
    for (const auto& t : a) a_conj.push_back({{-t.frequency[0], -t.frequency[1]}, t.cos_coef, 0.0});
    for (const auto& t : b) b_conj.push_back({{-t.frequency[0], -t.frequency[1]}, t.cos_coef, 0.0});
    const double v = exact_correlation_torus({cat, {Observable::trig(2, a), Observable::trig(2, b)}, {0, 1}, {}});
    const double w =
        exact_correlation_torus({cat, {Observable::trig(2, a_conj), Observable::trig(2, b_conj)}, {0, 1}, {}});
    CHECK(v == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("torus oracle agrees with Monte Carlo") {
  const auto cat = cat_map();
  const auto f0 = Observable::trig(2, {TrigTerm{{-2, -1}, 1.0, 0.3}, TrigTerm{{0, 1}, 0.5, 0.0}});
  const auto f1 = Observable::trig(2, {TrigTerm{{1, 0}, 1.0, -0.4}, TrigTerm{{0, 0}, 0.2, 0.0}});
  CorrelationQuery q{cat, {f0, f1}, {0, 1}, {}};
  const double exact = exact_correlation_torus(q);
  const auto est = mc_correlation(q, {100000, 5, 1});
  CHECK(std::abs(est.estimate - exact) <= 4 * est.std_error);
}

TEST_CASE("torus frequencies at large times") {
  const auto cat = cat_map();
  const auto f = character({1, 0}, 1, 0);
  // L^T is symmetric with no eigenvector on the integer lattice: no cancellation.
  CHECK(exact_correlation_torus({cat, {f, f}, {0, 500}, {}}) == 0.0);
  ExactOptions tight;
  tight.frequency_bits = 64;
  CHECK(code_of([&] { exact_correlation_torus({cat, {f, f}, {0, 500}, {}}, tight); }) == Errc::FrequencyOverflow);
}

TEST_CASE("mixing defect examples") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  const auto d = mixing_defect({s, {one, one}, {0, 3}, {}});
  CHECK(d.exact);
  CHECK(d.value == doctest::Approx(0.16 / 18.0).epsilon(1e-12));
  for (int n = 1; n <= 12; ++n)
    CHECK(mixing_defect({s, {one, one}, {0, n}, {}}).value ==
          doctest::Approx(std::pow(0.4, n - 1) / 18.0).epsilon(1e-10));

  const auto c = constant(s, 3.0);
  CHECK(mixing_defect({s, {c, c, c}, {0, 1, 2}, {}}).value == doctest::Approx(0.0));

  const auto coin = fair_coin();
  const auto h = indicator(coin, 2);
  CHECK(mixing_defect({coin, {h, h}, {0, 1}, {}}).value == 0.0);
}

TEST_CASE("mixing defect falls back to Monte Carlo on oversized spans") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  ExactOptions small;
  small.span_limit = 5;
  const auto d = mixing_defect({s, {one, one}, {0, 8}, {}}, std::nullopt, {200000, 3, 1}, small);
  CHECK_FALSE(d.exact);
  CHECK(d.std_error > 0);
  CHECK(std::abs(d.correlation - (25.0 / 36.0 + std::pow(0.4, 7) / 18.0)) <= 4 * d.std_error);
}

TEST_CASE("min-gap decay check") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  std::vector<std::vector<std::int64_t>> tuples;
  for (int n = 1; n <= 12; ++n) tuples.push_back({0, n});
  const auto check = min_gap_decay_check(s, {one, one}, tuples);
  CHECK(check.fit.model == RateModel::exponential);
  CHECK(std::abs(check.fit.exponent - std::log(2.5)) <= 0.1 * std::log(2.5));

  const auto coin = fair_coin();
  const auto h = indicator(coin, 1);
  const auto iid = min_gap_decay_check(coin, {h, h}, tuples);
  CHECK(iid.fit.degenerate);
  CHECK(iid.fit.amplitude == 0.0);

  const auto cat = cat_map();
  const auto f = character({1, 2}, 1, 0);
  const auto g = character({3, -1}, 1, 0);
  const auto torus = min_gap_decay_check(cat, {f, g}, tuples);
  CHECK(torus.fit.amplitude == 0.0);

  CHECK(code_of([&] { min_gap_decay_check(s, {one, one}, {{0, 1}, {0, 2}, {0, 3}}); }) ==
        Errc::InsufficientData);
  CHECK(code_of([&] { min_gap_decay_check(s, {one, one}, {{0, 1}, {0, 3}, {0, 2}, {0, 4}}); }) ==
        Errc::DomainError);
}

TEST_CASE("cumulant decay scan") {
  const auto s = markov_example();
  const auto one = indicator(s, 1);
  std::vector<std::vector<std::int64_t>> tuples;
  for (int n = 1; n <= 12; ++n) tuples.push_back({0, n});
  const auto scan = cumulant_decay_scan(s, {one, one}, tuples);
  CHECK(scan.fit.model == RateModel::exponential);
  CHECK(std::abs(scan.fit.exponent - std::log(2.5)) <= 0.1 * std::log(2.5));
  CHECK(scan.rows[2].cumulant == doctest::Approx(0.16 / 18.0));

  const double probs[] = {0.3, 0.7};
  const auto b = bernoulli_shift(probs);
  const auto f = centered_indicator(b, 1);
  const auto tables = cumulant_decay_scan(b, {f, f, f}, {{0, 1, 2}, {0, 2, 5}, {0, 4, 9}});
  for (const auto& t : tables.tables)
    for (SubsetMask m = 1; m <= t.full(); ++m)
      if (std::popcount(m) >= 2) CHECK(std::abs(t.cumulant_of(m)) <= 1e-12);
}

TEST_CASE("triple cumulant of a Markov chain is nonzero and decays") {
  const auto s = markov_example();
  const auto f = centered_indicator(s, 1);
  const auto t1 = joint_cumulants({s, {f, f, f}, {0, 1, 2}, {}});
  const auto t2 = joint_cumulants({s, {f, f, f}, {0, 5, 10}, {}});
  CHECK(std::abs(t1.cumulant_of(0b111)) > 1e-4);
  CHECK(std::abs(t2.cumulant_of(0b111)) < std::abs(t1.cumulant_of(0b111)));
}

TEST_CASE("multiple mixing is controlled by the single L-infinity coefficient") {
  std::mt19937_64 rng(29);
  for (bool markov : {true, false}) {
    const auto s = markov ? markov_example(false) : fair_coin(false);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Observable> obs;
      std::vector<std::int64_t> t{0};
      for (int i = 0; i < 3; ++i) obs.push_back(random_cylinder(s, 0, rng));
      std::uniform_int_distribution<int> gap(1, 6);
      t.push_back(t.back() + gap(rng));
      t.push_back(t.back() + gap(rng));
      const auto r = multiple_mixing_check(s, obs, t);
      CHECK(r.holds);
      if (!markov) CHECK(r.defect <= 1e-14);
    }
  }
  // With f_0 centred the bound is the pair coefficient at gap n_1 times the sup norms.
  const auto s = markov_example(false);
  const auto f0 = centered_indicator(s, 1);
  const auto g = indicator(s, 2);
  const auto r = multiple_mixing_check(s, {f0, g, g}, std::vector<std::int64_t>{0, 3, 5});
  CHECK(r.bound == doctest::Approx(linf_mixing_coefficient(s, f0, 3)));
}
