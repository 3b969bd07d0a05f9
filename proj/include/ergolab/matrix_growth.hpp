#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ergolab/sequences.hpp"

namespace ergolab::matrix_growth {

using Matrix = Eigen::MatrixXd;

// Moduli within this distance of 1 cannot be told apart from 1 numerically.
inline constexpr double kEigenTolerance = 1e-9;
inline constexpr double kCommuteTolerance = 1e-10;

bool is_integral(const Matrix& m) noexcept;

enum class QuMode { numeric, exact };

// All eigenvalues of modulus 1. Numeric mode accepts moduli within tol of 1;
// when a modulus falls within kEigenTolerance of 1 the decision goes to the
// exact test for integer input and raises Indeterminate otherwise. Exact mode
// (integer input only) factors the characteristic polynomial into cyclotomic
// polynomials. Throws Singular.
bool is_quasi_unipotent(const Matrix& m, double tol = 1e-6, QuMode mode = QuMode::numeric);

// Characteristic polynomial det(xI - m), ascending coefficients, integer input.
std::vector<long long> characteristic_polynomial(const Matrix& m);

// Cyclotomic polynomial Phi_n, ascending coefficients.
std::vector<long long> cyclotomic(int n);

struct NormPower {
  double norm = 0.0;  // spectral norm of m^n; inf once it leaves double range
  double log_norm = 0.0;
};

NormPower norm_power(const Matrix& m, std::int64_t n);

struct JordanGrowth {
  double norm = 0.0;  // ||[[s^n, n s^{n-1}], [0, s^n]]||
  bool at_least_n = false;
};

JordanGrowth jordan_block_growth(std::complex<double> s, std::int64_t n);

struct GrowthProfile {
  double base = 1.0;  // e^a from log ||m^n|| ~ a n + p log n + c
  int poly_degree = 0;  // round(p)
  double p = 0.0;
  double residual = 0.0;  // rms of the fit
  double spectral_radius = 0.0;
  int structural_degree = 0;  // nilpotency index - 1 on the top eigenvalues
  std::vector<double> log_norms;  // n = 1..n_max
};

// Throws FitInconsistent when fit and spectrum disagree.
GrowthProfile growth_profile(const Matrix& m, std::int64_t n_max);

// Largest nilpotency index of (m - lambda I) over eigenvalues of maximal
// modulus, minus one.
int structural_degree(const Matrix& m);

struct CommutingPair {
  Matrix g;
  Matrix h;
  bool integral = false;

  // Throws Singular, NotCommuting, DomainError on shape.
  static CommutingPair make(Matrix g, Matrix h);
};

// ||h^m g^n||; exact integer products for integral pairs.
double pair_norm(const CommutingPair& pair, std::int64_t m, std::int64_t n);

struct PairCounting {
  sequences::CountingReport row;
  sequences::CountingReport column;
  bool row_pass() const noexcept { return row.pass; }
  bool column_pass() const noexcept { return column.pass; }
};

// b(m, n) = ||h^m g^n|| checked in both orientations.
PairCounting pair_counting_check(const CommutingPair& pair, std::span<const std::int64_t> m_grid, std::int64_t K,
                                 std::int64_t n_max);

struct BalanceRow {
  std::int64_t n = 0;
  double norm = 0.0;       // ||h^m g^n||
  double two_eigen = 0.0;  // (max_{S+} |s^n t_s^m| + max_{S-} |s^n t_s^m|) / 2
  double curve = 0.0;      // base^{|n - k| - 1} / 2
  bool holds = false;      // norm >= two_eigen >= curve
};

struct BalanceReport {
  std::int64_t k = 0;
  double base = 0.0;  // min(min_{S+} |s|, min_{S-} 1/|s|)
  double det_g = 0.0;
  double det_h = 0.0;
  bool unimodular = false;
  std::vector<BalanceRow> rows;
  bool holds = false;
};

// Throws HypothesisFailed when the pair is not simultaneously diagonalizable,
// either matrix is quasi-unipotent, or some simultaneous eigenvector is not
// expanded by exactly one of g and h.
BalanceReport hyperbolic_balance_bound(const CommutingPair& pair, std::int64_t m, std::int64_t n_lo,
                                       std::int64_t n_hi);

}  // namespace ergolab::matrix_growth
