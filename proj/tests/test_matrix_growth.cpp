#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ergolab/matrix_growth.hpp"
#include "test_util.hpp"

using namespace ergolab;
using namespace ergolab::matrix_growth;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const double kGolden = (3.0 + std::sqrt(5.0)) / 2.0;

Matrix cat() { return mat2(2, 1, 1, 1); }
Matrix cat_inverse() { return mat2(1, -1, -1, 2); }

std::vector<std::int64_t> range(std::int64_t a, std::int64_t b) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(b - a + 1));
  std::iota(out.begin(), out.end(), a);
  return out;
}

Matrix random_integer(std::mt19937_64& rng, int d, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Multiply out a polynomial from its roots; used as an independent check on
// the characteristic polynomial.
std::vector<std::complex<double>> poly_from_roots(const Eigen::VectorXcd& roots) {
  std::vector<std::complex<double>> p{1.0};
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    std::vector<std::complex<double>> q(p.size() + 1, 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      q[j + 1] += p[j];
      q[j] -= roots(i) * p[j];
    }
    p = q;
  }
  return p;
}

}  // namespace

TEST_CASE("quasi-unipotence examples") {
  CHECK(is_quasi_unipotent(Matrix::Identity(3, 3)));
  CHECK_FALSE(is_quasi_unipotent(cat()));
  CHECK(is_quasi_unipotent(mat2(1, 1, 0, 1)));
  CHECK(is_quasi_unipotent(Matrix::Identity(3, 3), 1e-6, QuMode::exact));
  CHECK_FALSE(is_quasi_unipotent(cat(), 1e-6, QuMode::exact));
  CHECK(is_quasi_unipotent(mat2(1, 1, 0, 1), 1e-6, QuMode::exact));
  // order 3 and order 4 rotations
  CHECK(is_quasi_unipotent(mat2(0, -1, 1, -1), 1e-6, QuMode::exact));
  CHECK(is_quasi_unipotent(mat2(0, -1, 1, 0)));
  CHECK(code_of([] { is_quasi_unipotent(mat2(1, 2, 2, 4)); }) == Errc::Singular);
  CHECK(code_of([] { is_quasi_unipotent(mat2(1, 2, 2, 4), 1e-6, QuMode::exact); }) == Errc::Singular);
  CHECK(code_of([] { is_quasi_unipotent(mat2(0.5, 0, 0, 2), 1e-6, QuMode::exact); }) == Errc::DomainError);
  const double e = 1.0 + 1e-12;
  CHECK(code_of([&] { is_quasi_unipotent(mat2(e, 0, 0, 1.0 / e)); }) == Errc::Indeterminate);
  CHECK_FALSE(is_quasi_unipotent(mat2(1.5, 0, 0, 1.0 / 1.5)));
}

TEST_CASE("numeric and exact quasi-unipotence agree on integer matrices") {
  std::mt19937_64 rng(3);
  int agreed = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Matrix m = random_integer(rng, 3, -2, 2);
    if (std::abs(m.determinant()) < 0.5) continue;
    // Defective eigenvalues carry errors near eps^{1/3}, hence the loose tolerance.
    CHECK(is_quasi_unipotent(m, 1e-4) == is_quasi_unipotent(m, 1e-6, QuMode::exact));
    ++agreed;
  }
  CHECK(agreed > 100);

  Matrix defective(3, 3);
  defective << -2, -1, -2, 1, 0, 2, 2, 2, -1;
  CHECK(is_quasi_unipotent(defective, 1e-6, QuMode::exact));
  CHECK(is_quasi_unipotent(defective, 1e-4));
}

TEST_CASE("characteristic polynomial") {
  CHECK(characteristic_polynomial(cat()) == std::vector<long long>{1, -3, 1});
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_integer(rng, 4, -5, 5);
    const auto p = characteristic_polynomial(m);
    const auto q = poly_from_roots(Eigen::EigenSolver<Matrix>(m, false).eigenvalues());
    REQUIRE(p.size() == q.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(q[i] - static_cast<double>(p[i])) < 1e-6 * (1.0 + std::abs(q[i])));
  }
}

TEST_CASE("cyclotomic polynomials") {
  CHECK(cyclotomic(1) == std::vector<long long>{-1, 1});
  CHECK(cyclotomic(2) == std::vector<long long>{1, 1});
  CHECK(cyclotomic(4) == std::vector<long long>{1, 0, 1});
  CHECK(cyclotomic(6) == std::vector<long long>{1, -1, 1});
  CHECK(cyclotomic(12) == std::vector<long long>{1, 0, -1, 0, 1});
  // degree is Euler's phi
  const int phi[] = {1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4, 12, 6, 8};
  for (int n = 1; n <= 15; ++n) CHECK(cyclotomic(n).size() == static_cast<std::size_t>(phi[n - 1]) + 1);
}

TEST_CASE("norm power examples") {
  for (std::int64_t n : {0, 1, 7, 100}) CHECK(norm_power(Matrix::Identity(2, 2), n).norm == doctest::Approx(1.0));
  CHECK(norm_power(mat2(1, 1, 0, 1), 5).norm == doctest::Approx((5.0 + std::sqrt(29.0)) / 2.0).epsilon(1e-12));
  for (std::int64_t n = 1; n <= 30; ++n) {
    const double ratio = norm_power(cat(), n).norm / std::pow(kGolden, static_cast<double>(n));
    CHECK(std::abs(ratio - 1.0) < 1e-9);
  }
  const auto big = norm_power(cat(), 5000);
  CHECK(std::isinf(big.norm));
  CHECK(big.log_norm == doctest::Approx(5000.0 * std::log(kGolden)).epsilon(1e-9));
}

TEST_CASE("norm power is submultiplicative") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> e(0, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix m = random_integer(rng, 3, -3, 3);
    const std::int64_t a = e(rng), b = e(rng);
    const double lhs = norm_power(m, a + b).log_norm;
    const double rhs = norm_power(m, a).log_norm + norm_power(m, b).log_norm;
    if (std::isinf(lhs) && lhs < 0) continue;
    CHECK(lhs <= rhs + 1e-9 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("Jordan block growth") {
  CHECK(jordan_block_growth(1.0, 5).norm == doctest::Approx(5.1925824));
  CHECK(jordan_block_growth(1.0, 0).norm == 1.0);
  CHECK(jordan_block_growth({0.0, 1.0}, 4).norm == jordan_block_growth(1.0, 4).norm);
  for (std::int64_t n = 0; n <= 10000; ++n) CHECK(jordan_block_growth(std::polar(1.0, 0.1 * n), n).at_least_n);
  // agrees with the singular values of the block itself
  for (std::int64_t n : {1, 3, 17}) {
    const std::complex<double> s = std::polar(1.0, 0.7);
    Eigen::Matrix2cd block;
    block << std::pow(s, n), static_cast<double>(n) * std::pow(s, n - 1), 0.0, std::pow(s, n);
    CHECK(jordan_block_growth(s, n).norm == doctest::Approx(Eigen::JacobiSVD<Eigen::Matrix2cd>(block).singularValues()(0)));
  }
  CHECK(code_of([] { jordan_block_growth(1.1, 3); }) == Errc::DomainError);
}

TEST_CASE("growth profile examples") {
  const auto u = growth_profile(mat2(1, 1, 0, 1), 64);
  CHECK(u.base == doctest::Approx(1.0).epsilon(0.01));
  CHECK(u.poly_degree == 1);
  const auto c = growth_profile(cat(), 64);
  CHECK(c.base == doctest::Approx(kGolden).epsilon(0.01));
  CHECK(c.poly_degree == 0);
  const auto id = growth_profile(Matrix::Identity(3, 3), 16);
  CHECK(id.base == doctest::Approx(1.0));
  CHECK(id.poly_degree == 0);
  Matrix j3 = Matrix::Identity(3, 3);
  j3(0, 1) = 1;
  j3(1, 2) = 1;
  CHECK(growth_profile(j3, 128).poly_degree == 2);
  CHECK(structural_degree(j3) == 2);
  CHECK(code_of([] { growth_profile(cat(), 8); }) == Errc::DomainError);
}

TEST_CASE("growth profile base matches the spectral radius") {
  std::mt19937_64 rng(19);
  int tested = 0;
  for (int trial = 0; trial < 2000 && tested < 60; ++trial) {
    const Matrix m = random_integer(rng, 3, -4, 4);
    if (std::abs(m.determinant()) < 0.5) continue;
    auto ev = Eigen::EigenSolver<Matrix>(m, false).eigenvalues();
    std::vector<double> mod;
    for (Eigen::Index i = 0; i < ev.size(); ++i) mod.push_back(std::abs(ev(i)));
    std::sort(mod.begin(), mod.end());
    if (mod[1] / mod[2] > 0.8 || mod[0] / mod[1] > 0.95 || mod[2] < 1.05) continue;
    const auto g = growth_profile(m, 64);
    CHECK(std::abs(g.base / mod[2] - 1.0) < 0.01);
    CHECK(g.poly_degree == 0);
    ++tested;
  }
  CHECK(tested == 60);
}

TEST_CASE("commuting pair construction") {
  CHECK(code_of([] { CommutingPair::make(cat(), mat2(1, 1, 0, 1)); }) == Errc::NotCommuting);
  CHECK(code_of([] { CommutingPair::make(cat(), mat2(1, 1, 1, 1)); }) == Errc::Singular);
  const auto p = CommutingPair::make(cat(), cat_inverse());
  CHECK(p.integral);
  CHECK(pair_norm(p, 3, 3) == doctest::Approx(1.0));
  CHECK(pair_norm(p, 0, 4) == doctest::Approx(std::pow(kGolden, 4.0)));
  const auto d = CommutingPair::make(mat2(0.5, 0, 0, 2), mat2(2, 0, 0, 0.5));
  CHECK_FALSE(d.integral);
  CHECK(pair_norm(d, 3, 5) == doctest::Approx(4.0));
}

TEST_CASE("pair counting for unipotent, hyperbolic and trivial pairs") {
  const auto uni = CommutingPair::make(mat2(1, 1, 0, 1), mat2(1, 3, 0, 1));
  const auto grid = range(1, 50);
  const auto r = pair_counting_check(uni, grid, 200, 100);
  CHECK(r.row_pass());
  CHECK(r.row.witness_M <= 2.0);
  const auto grid2 = range(1, 100);
  const auto r2 = pair_counting_check(uni, grid2, 200, 100);
  CHECK(r2.row_pass());
  CHECK(std::abs(r2.row.witness_M / r.row.witness_M - 1.0) <= 0.10);

  // b(m, n) = ||L^{n - m}||
  const auto hyp = CommutingPair::make(cat(), cat_inverse());
  const auto h = pair_counting_check(hyp, range(1, 30), 120, 100);
  CHECK(h.row_pass());

  const auto id = CommutingPair::make(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const auto t = pair_counting_check(id, range(1, 10), 50, 20);
  CHECK_FALSE(t.row_pass());
  CHECK_FALSE(t.column_pass());
}

TEST_CASE("Engel-form unipotent pairs have grid-stable witnesses") {
  // polynomials in one nilpotent upper-triangular matrix commute
  Matrix N = Matrix::Zero(3, 3);
  N(0, 1) = 1;
  N(1, 2) = 1;
  const Matrix I = Matrix::Identity(3, 3);
  const auto pair = CommutingPair::make(I + 2 * N, I + N + N * N);
  const auto a = pair_counting_check(pair, range(1, 40), 200, 80);
  const auto b = pair_counting_check(pair, range(1, 80), 200, 80);
  CHECK(a.row_pass());
  CHECK(b.row_pass());
  CHECK(std::abs(b.row.witness_M / a.row.witness_M - 1.0) <= 0.10);
}

TEST_CASE("hyperbolic balance bound") {
  // h^m g^n = L^{m - n}
  const auto pair = CommutingPair::make(cat_inverse(), cat());
  const auto rep = hyperbolic_balance_bound(pair, 10, 0, 40);
  CHECK(rep.k == 10);
  CHECK(rep.base == doctest::Approx(kGolden));
  CHECK(rep.unimodular);
  CHECK(rep.holds);
  const auto lowest = std::min_element(rep.rows.begin(), rep.rows.end(),
                                       [](const auto& a, const auto& b) { return a.curve < b.curve; });
  CHECK(lowest->n == 10);
  for (const auto& row : rep.rows) {
    CHECK(row.norm == doctest::Approx(std::pow(kGolden, std::abs(static_cast<double>(row.n - 10)))).epsilon(1e-9));
    CHECK(row.holds);
  }

  const auto zero = hyperbolic_balance_bound(pair, 0, 0, 20);
  CHECK(zero.k == 0);
  CHECK(zero.holds);
  CHECK(zero.rows[5].curve == doctest::Approx(0.5 * std::pow(kGolden, 4.0)));

  const auto diag = CommutingPair::make(mat2(0.5, 0, 0, 2), mat2(2, 0, 0, 0.5));
  const auto d = hyperbolic_balance_bound(diag, 6, 0, 20);
  CHECK(d.holds);
  for (const auto& row : d.rows) {
    const double expect = std::max(std::exp2(6.0 - row.n), std::exp2(row.n - 6.0));
    CHECK(row.norm == doctest::Approx(expect));
    CHECK(row.norm >= row.two_eigen);
  }

  CHECK(code_of([] { hyperbolic_balance_bound(CommutingPair::make(cat(), cat()), 3, 0, 5); }) ==
        Errc::HypothesisFailed);
  CHECK(code_of([] { hyperbolic_balance_bound(CommutingPair::make(mat2(1, 1, 0, 1), mat2(1, 2, 0, 1)), 3, 0, 5); }) ==
        Errc::HypothesisFailed);
}
