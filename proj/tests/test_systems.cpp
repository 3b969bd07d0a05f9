#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ergolab/systems.hpp"
#include "test_util.hpp"

using namespace ergolab;
using namespace ergolab::systems;

namespace {

ShiftSystem markov_example() {
  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(2, 2);
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  return build_shift(a, p);
}

ShiftSystem fair_coin() {
  const double probs[] = {0.5, 0.5};
  return bernoulli_shift(probs);
}

TorusAutomorphism cat_map(int q = 128) {
  IntMatrix m(2, 2);
  m << 2, 1, 1, 1;
  return build_torus(m, q);
}


}  // namespace

TEST_CASE("build_shift computes the stationary vector") {
  const auto s = markov_example();
  // pi P = pi with 0.1 pi_1 = 0.5 pi_2 gives (5/6, 1/6).
  CHECK(s.stationary()(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(s.stationary()(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  const Eigen::RowVectorXd residual = s.stationary().transpose() * s.transition() - s.stationary().transpose();
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::abs(s.transition().row(i).sum() - 1.0) <= 1e-12);

  const auto coin = fair_coin();
  CHECK(coin.stationary()(0) == doctest::Approx(0.5));
  CHECK(coin.stationary()(1) == doctest::Approx(0.5));
}

TEST_CASE("build_shift rejects invalid systems") {
  Eigen::MatrixXi flip(2, 2);
  flip << 0, 1, 1, 0;
  Eigen::MatrixXd p(2, 2);
  p << 0, 1, 1, 0;
  CHECK(code_of([&] { build_shift(flip, p); }) == Errc::NotAperiodic);

  Eigen::MatrixXi golden(2, 2);
  golden << 1, 1, 1, 0;
  Eigen::MatrixXd full(2, 2);
  full << 0.5, 0.5, 0.5, 0.5;
  CHECK(code_of([&] { build_shift(golden, full); }) == Errc::IncompatibleSupport);

  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  CHECK(code_of([&] { build_shift(Eigen::MatrixXi::Ones(2, 2), bad); }) == Errc::NotStochastic);

  // Golden-mean shift is aperiodic: A^2 > 0.
  Eigen::MatrixXd gp(2, 2);
  gp << 0.5, 0.5, 1.0, 0.0;
  const auto g = build_shift(golden, gp);
  CHECK(g.stationary()(0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("aperiodicity bound (m-1)^2+1") {
  // Wielandt's extremal matrix on 3 symbols needs exactly the 5th power.
  Eigen::MatrixXi w(3, 3);
  w << 0, 1, 0, 0, 0, 1, 1, 1, 0;
  CHECK(is_aperiodic(w));
  Eigen::MatrixXi cycle(3, 3);
  cycle << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK_FALSE(is_aperiodic(cycle));
}

TEST_CASE("sample_shift_point marginals") {
  const auto coin = fair_coin();
  const auto p = sample_shift_point(coin, 500000, 7);
  long ones = 0;
  for (std::int64_t i = -500000; i < 500000; ++i) ones += p.at(i) == 1;
  const double freq = static_cast<double>(ones) / 1e6;
  CHECK(std::abs(freq - 0.5) <= 4.0 / std::sqrt(1e6) * 0.5);

  // Index-0 symbol over many independent draws.
  const auto s = markov_example();
  long hits = 0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    Rng rng = make_rng(11, static_cast<std::uint64_t>(i));
    std::uint8_t sym = 0;
    fill_window(s, 0, std::span<std::uint8_t>(&sym, 1), rng, 0);
    hits += sym == 0;
  }
  const double pi1 = 5.0 / 6.0;
  CHECK(std::abs(hits / double(draws) - pi1) <= 4.0 * std::sqrt(pi1 * (1 - pi1) / draws));
}

TEST_CASE("sampling is deterministic and backward chain is consistent") {
  const auto s = markov_example();
  CHECK(sample_shift_point(s, 50, 3) == sample_shift_point(s, 50, 3));
  CHECK_FALSE(sample_shift_point(s, 50, 3) == sample_shift_point(s, 50, 4));

  // Pair frequency (x_{-1}, x_0) = (1, 1) must match pi_1 P_11 = 3/4 through
  // the reversed chain as well.
  long hits = 0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const auto p = sample_shift_point(s, 1, derive_seed(5, static_cast<std::uint64_t>(i)));
    hits += p.at(-1) == 1 && p.at(0) == 1;
  }
  CHECK(std::abs(hits / double(draws) - 0.75) <= 4.0 * std::sqrt(0.75 * 0.25 / draws));
}

TEST_CASE("shift_apply") {
  const auto s = markov_example();
  const auto p = sample_shift_point(s, 10, 1);
  CHECK(shift_apply(p, 0) == p);
  CHECK(shift_apply(shift_apply(p, 3), 4) == shift_apply(p, 7));
  CHECK(shift_apply(p, 5).at(0) == p.at(5));
  const auto radius0 = indicator(s, 1);
  CHECK(code_of([&] { eval(radius0, shift_apply(p, 11)); }) == Errc::WindowExhausted);
  CHECK_NOTHROW(eval(radius0, shift_apply(p, 10)));
}

TEST_CASE("torus_apply_power") {
  const auto cat = cat_map();
  const double half[] = {0.5, 0.0};
  const auto x = make_torus_point(half);
  CHECK(torus_apply_power(cat, x, 0) == x);
  const auto y = torus_apply_power(cat, x, 1);
  CHECK(coordinate_value(y.coords[0], 128) == 0.0);
  CHECK(coordinate_value(y.coords[1], 128) == 0.5);

  Rng rng(9);
  const auto z = sample_torus_point(cat, rng);
  auto step = z;
  for (int i = 0; i < 3; ++i) step = torus_apply_power(cat, step, 1);
  CHECK(step == torus_apply_power(cat, z, 3));
  CHECK(torus_apply_power(cat, torus_apply_power(cat, z, 17), -17) == z);
  CHECK(torus_apply_power(cat, torus_apply_power(cat, z, -5), 12) == torus_apply_power(cat, z, 7));
}

TEST_CASE("torus map is a bijection of the q = 8 lattice") {
  const auto cat = cat_map(8);
  std::set<std::pair<unsigned, unsigned>> images;
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b) {
      TorusPoint p{{a, b}, 8};
      const auto q = torus_apply_power(cat, p, 1);
      images.emplace(static_cast<unsigned>(q.coords[0]), static_cast<unsigned>(q.coords[1]));
    }
  CHECK(images.size() == 65536);
}

TEST_CASE("build_torus validation") {
  IntMatrix shear(2, 2);
  shear << 1, 1, 0, 1;
  CHECK(code_of([&] { build_torus(shear); }) == Errc::NotHyperbolic);
  IntMatrix det2(2, 2);
  det2 << 2, 0, 0, 1;
  CHECK(code_of([&] { build_torus(det2); }) == Errc::NotUnimodular);
  IntMatrix three(3, 3);
  three << 0, 0, 1, 1, 0, -1, 0, 1, 2;  // companion of x^3 - 2x^2 + x - 1
  CHECK_NOTHROW(build_torus(three));
}

TEST_CASE("eval") {
  const auto s = markov_example();
  const auto p = sample_shift_point(s, 5, 2);
  CHECK(eval(constant(s, 2.5), p) == 2.5);

  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(2, 2);
  auto table = Observable::cylinder(2, 0, {1.0, 0.0});
  auto symbols = std::make_shared<const std::vector<std::uint8_t>>(std::vector<std::uint8_t>{1});
  const ShiftPoint two(symbols, 0);
  CHECK(eval(table, two) == 0.0);

  const auto one = character({0, 0}, 1.0, 0.0);
  Rng rng(1);
  const auto x = sample_torus_point(cat_map(), rng);
  CHECK(eval(one, x) == 1.0);
  CHECK(code_of([&] { eval(one, p); }) == Errc::VariantMismatch);
  CHECK(code_of([&] { eval(table, x); }) == Errc::VariantMismatch);
}

TEST_CASE("exact_mean") {
  const auto s = markov_example();
  CHECK(exact_mean(indicator(s, 1), s) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  const Symbol word[] = {1, 1};
  CHECK(exact_mean(word_indicator(s, word, 0), s) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(exact_mean(character({1, -2}, 0.3, 0.7), cat_map()) == 0.0);
  CHECK(exact_mean(character({0, 0}, 0.3, 0.7), cat_map()) == 0.3);

  // Disjoint windows under Bernoulli: product of indicator means.
  const double probs[] = {0.2, 0.3, 0.5};
  const auto b = bernoulli_shift(probs);
  auto joint = Observable::cylinder(b, 2, [](std::span<const Symbol> w) {
    return (w[0] == 3 ? 1.0 : 0.0) * (w[3] == 2 ? 1.0 : 0.0);
  });
  CHECK(exact_mean(joint, b) == doctest::Approx(0.5 * 0.3).epsilon(1e-14));
}

TEST_CASE("Monte Carlo means agree with exact means") {
  const auto s = markov_example();
  const Symbol word[] = {2, 1, 1};
  const auto f = word_indicator(s, word, -1).scaled(3.0).plus_constant(-0.2);
  const double exact = exact_mean(f, s);
  const int samples = 1000000;
  double sum = 0.0, sumsq = 0.0;
  std::vector<std::uint8_t> buf(3);
  for (int i = 0; i < samples; ++i) {
    Rng rng = make_rng(99, static_cast<std::uint64_t>(i));
    fill_window(s, -1, buf, rng, -1);
    const double v = f.value_at(WindowView{buf.data(), -1, 3}, 0);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt(sumsq / samples - mean * mean);
  CHECK(std::abs(mean - exact) <= 4.0 * sd / std::sqrt(double(samples)));
}
