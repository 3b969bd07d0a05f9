#include "ergolab/matrix_growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "ergolab/error.hpp"

namespace ergolab::matrix_growth {

namespace {

using boost::multiprecision::cpp_int;
using Poly = std::vector<cpp_int>;  // ascending
using CMatrix = Eigen::MatrixXcd;
using BigMatrix = std::vector<cpp_int>;  // row-major d x d

constexpr const char* kModule = "matrix_growth";

[[noreturn]] void domain(const std::string& what) { throw Error(Errc::DomainError, what, kModule); }

void require_square(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) domain("matrix must be square and non-empty");
  if (!m.allFinite()) domain("matrix entries must be finite");
}

void require_invertible(const Matrix& m) {
  if (!Eigen::FullPivLU<Matrix>(m).isInvertible()) throw Error(Errc::Singular, "matrix is singular");
}

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// m scaled to max-entry 1 together with the log of the factor removed.
struct Scaled {
  Matrix value;
  double log_scale = 0.0;

  void normalize() {
    const double s = value.cwiseAbs().maxCoeff();
    if (s == 0.0) {
      log_scale = -std::numeric_limits<double>::infinity();
      return;
    }
    value /= s;
    log_scale += std::log(s);
  }
};

Scaled scaled_power(const Matrix& m, std::int64_t n) {
  Scaled result{Matrix::Identity(m.rows(), m.cols()), 0.0};
  Scaled base{m, 0.0};
  base.normalize();
  while (n > 0) {
    if (n & 1) {
      result.value = result.value * base.value;
      result.log_scale += base.log_scale;
      result.normalize();
    }
    n >>= 1;
    if (n == 0) break;
    base.value = base.value * base.value;
    base.log_scale *= 2.0;
    base.normalize();
  }
  return result;
}

NormPower norm_of(const Scaled& s) {
  NormPower out;
  if (!std::isfinite(s.log_scale) && s.log_scale < 0) {
    out.log_norm = s.log_scale;
    return out;
  }
  out.log_norm = std::log(spectral_norm(s.value)) + s.log_scale;
  if (std::isnan(out.log_norm) || out.log_norm == std::numeric_limits<double>::infinity())
    throw Error(Errc::Overflow, "log-norm left the double range");
  out.norm = std::exp(out.log_norm);
  return out;
}

// -- exact polynomial arithmetic ---------------------------------------------

void trim(Poly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

// p / d for monic d; empty result when the division leaves a remainder.
Poly divide_exact(const Poly& p, const Poly& d) {
  if (p.size() < d.size()) return {};
  Poly rem = p;
  Poly q(p.size() - d.size() + 1, 0);
  for (std::size_t i = q.size(); i-- > 0;) {
    const cpp_int c = rem[i + d.size() - 1];
    q[i] = c;
    if (c != 0)
      for (std::size_t j = 0; j < d.size(); ++j) rem[i + j] -= c * d[j];
  }
  for (const auto& r : rem)
    if (r != 0) return {};
  return q;
}

Poly cyclotomic_big(int n) {
  static std::map<int, Poly> memo;
  static std::recursive_mutex lock;
  const std::lock_guard guard(lock);
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  Poly p(static_cast<std::size_t>(n) + 1, 0);
  p[0] = -1;
  p.back() = 1;
  for (int d = 1; d < n; ++d)
    if (n % d == 0) p = divide_exact(p, cyclotomic_big(d));
  memo[n] = p;
  return p;
}

int euler_phi(int n) {
  int out = n;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    while (n % p == 0) n /= p;
    out -= out / p;
  }
  if (n > 1) out -= out / n;
  return out;
}

BigMatrix to_big(const Matrix& m) {
  BigMatrix out;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(cpp_int(static_cast<long long>(std::llround(m(r, c)))));
  return out;
}

BigMatrix big_mul(const BigMatrix& a, const BigMatrix& b, std::size_t d) {
  BigMatrix out(d * d, 0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      if (a[i * d + k] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += a[i * d + k] * b[k * d + j];
    }
  return out;
}

BigMatrix big_identity(std::size_t d) {
  BigMatrix out(d * d, 0);
  for (std::size_t i = 0; i < d; ++i) out[i * d + i] = 1;
  return out;
}

BigMatrix big_power(const BigMatrix& m, std::int64_t n, std::size_t d) {
  BigMatrix result = big_identity(d);
  BigMatrix base = m;
  while (n > 0) {
    if (n & 1) result = big_mul(result, base, d);
    n >>= 1;
    if (n > 0) base = big_mul(base, base, d);
  }
  return result;
}

Poly charpoly_big(const Matrix& m) {
  const auto d = static_cast<std::size_t>(m.rows());
  const BigMatrix a = to_big(m);
  Poly c(d + 1, 0);
  c[d] = 1;
  BigMatrix mk(d * d, 0);
  for (std::size_t k = 1; k <= d; ++k) {
    mk = big_mul(a, mk, d);
    for (std::size_t i = 0; i < d; ++i) mk[i * d + i] += c[d - k + 1];
    const BigMatrix amk = big_mul(a, mk, d);
    cpp_int trace = 0;
    for (std::size_t i = 0; i < d; ++i) trace += amk[i * d + i];
    c[d - k] = -trace / static_cast<long long>(k);
  }
  return c;
}

std::vector<long long> to_ll(const Poly& p) {
  std::vector<long long> out;
  for (const auto& v : p) {
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
      throw Error(Errc::Overflow, "polynomial coefficient exceeds 64 bits");
    out.push_back(static_cast<long long>(v));
  }
  return out;
}

bool kronecker(const Matrix& m) {
  Poly p = charpoly_big(m);
  if (p[0] == 0) throw Error(Errc::Singular, "matrix is singular");
  const int d = static_cast<int>(m.rows());
  for (int n = 1; n <= 2 * d * d && p.size() > 1; ++n) {
    if (euler_phi(n) > d) continue;
    const Poly phi = cyclotomic_big(n);
    for (;;) {
      Poly q = divide_exact(p, phi);
      if (q.empty()) break;
      p = std::move(q);
    }
  }
  trim(p);
  return p.size() == 1 && p[0] == 1;
}

Eigen::VectorXcd eigenvalues(const Matrix& m) { return Eigen::EigenSolver<Matrix>(m, false).eigenvalues(); }

int matrix_rank(const CMatrix& a) {
  const Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = std::max(1e-9, 1e-6 * top);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  return rank;
}

double integral_pair_norm(const BigMatrix& p, std::size_t d) {
  cpp_int top = 0;
  for (const auto& v : p) top = std::max(top, v < 0 ? cpp_int(-v) : v);
  if (top == 0) return 0.0;
  if (boost::multiprecision::msb(top) > 1000) return std::numeric_limits<double>::infinity();
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[i * d + j].convert_to<double>();
  return spectral_norm(m);
}

}  // namespace

bool is_integral(const Matrix& m) noexcept {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (!std::isfinite(v) || v != std::round(v) || std::abs(v) > 9.0e15) return false;
  }
  return true;
}

std::vector<long long> characteristic_polynomial(const Matrix& m) {
  require_square(m);
  if (!is_integral(m)) domain("characteristic polynomial needs an integer matrix");
  return to_ll(charpoly_big(m));
}

std::vector<long long> cyclotomic(int n) {
  if (n < 1) domain("cyclotomic index must be positive");
  return to_ll(cyclotomic_big(n));
}

bool is_quasi_unipotent(const Matrix& m, double tol, QuMode mode) {
  require_square(m);
  if (mode == QuMode::exact) {
    if (!is_integral(m)) domain("exact quasi-unipotence test needs an integer matrix");
    return kronecker(m);
  }
  if (!(tol >= 0.0)) domain("tolerance must be non-negative");
  require_invertible(m);
  const auto ev = eigenvalues(m);
  bool ambiguous = false;
  bool all_unit = true;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double gap = std::abs(std::abs(ev(i)) - 1.0);
    if (gap > tol) all_unit = false;
    if (gap > 0.0 && gap < kEigenTolerance) ambiguous = true;
  }
  if (!ambiguous) return all_unit;
  if (is_integral(m)) return kronecker(m);
  throw Error(Errc::Indeterminate, "an eigenvalue modulus lies within 1e-9 of 1 for a non-integer matrix");
}

NormPower norm_power(const Matrix& m, std::int64_t n) {
  require_square(m);
  if (n < 0) domain("power must be non-negative");
  return norm_of(scaled_power(m, n));
}

JordanGrowth jordan_block_growth(std::complex<double> s, std::int64_t n) {
  if (std::abs(std::abs(s) - 1.0) > 1e-12) domain("Jordan block eigenvalue must have modulus 1");
  if (n < 0) domain("power must be non-negative");
  // Unimodular s factors out: the norm is that of [[1, n], [0, 1]].
  const double nd = static_cast<double>(n);
  JordanGrowth out;
  out.norm = (nd + std::sqrt(nd * nd + 4.0)) / 2.0;
  out.at_least_n = out.norm >= nd;
  return out;
}

int structural_degree(const Matrix& m) {
  require_square(m);
  const auto ev = eigenvalues(m);
  const auto d = m.rows();
  double rho = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) rho = std::max(rho, std::abs(ev(i)));
  const double cluster = 1e-6 * std::max(1.0, rho);
  std::vector<std::complex<double>> tops;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(ev(i)) < rho - cluster) continue;
    bool seen = false;
    for (const auto& t : tops) seen = seen || std::abs(t - ev(i)) <= cluster;
    if (!seen) tops.push_back(ev(i));
  }
  int best = 0;
  const CMatrix mc = m.cast<std::complex<double>>();
  for (const auto& lambda : tops) {
    // Average the cluster to damp the error of defective eigenvalues.
    std::complex<double> sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(ev(i) - lambda) <= cluster) {
        sum += ev(i);
        ++count;
      }
    const CMatrix a = mc - (sum / static_cast<double>(count)) * CMatrix::Identity(d, d);
    CMatrix power = a;
    int prev = matrix_rank(power);
    int index = 1;
    while (index < d) {
      power = power * a;
      const int r = matrix_rank(power);
      if (r == prev) break;
      prev = r;
      ++index;
    }
    best = std::max(best, index - 1);
  }
  return best;
}

GrowthProfile growth_profile(const Matrix& m, std::int64_t n_max) {
  require_square(m);
  if (n_max < 16) domain("growth profile needs N_max >= 16");
  require_invertible(m);
  GrowthProfile out;
  Scaled running{Matrix::Identity(m.rows(), m.cols()), 0.0};
  for (std::int64_t n = 1; n <= n_max; ++n) {
    running.value = running.value * m;
    running.normalize();
    out.log_norms.push_back(norm_of(running).log_norm);
  }
  // Later powers only, away from the transient of smaller eigenvalues.
  const std::int64_t start = n_max / 4;
  const auto rows = static_cast<Eigen::Index>(n_max - start + 1);
  Matrix design(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double n = static_cast<double>(start + i);
    design(i, 0) = n;
    design(i, 1) = std::log(n);
    design(i, 2) = 1.0;
    y(i) = out.log_norms[static_cast<std::size_t>(start + i - 1)];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
  out.base = std::exp(coef(0));
  out.p = coef(1);
  out.poly_degree = static_cast<int>(std::lround(out.p));
  out.residual = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(rows));

  const auto ev = eigenvalues(m);
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.spectral_radius = std::max(out.spectral_radius, std::abs(ev(i)));
  out.structural_degree = structural_degree(m);
  if (std::abs(out.base / out.spectral_radius - 1.0) > 0.01)
    throw Error(Errc::FitInconsistent, "fitted base " + std::to_string(out.base) + " vs spectral radius " +
                                           std::to_string(out.spectral_radius));
  if (out.poly_degree != out.structural_degree)
    throw Error(Errc::FitInconsistent, "fitted degree " + std::to_string(out.p) + " vs Jordan structure " +
                                           std::to_string(out.structural_degree));
  return out;
}

CommutingPair CommutingPair::make(Matrix g, Matrix h) {
  require_square(g);
  require_square(h);
  if (g.rows() != h.rows()) domain("pair matrices differ in size");
  require_invertible(g);
  require_invertible(h);
  CommutingPair pair;
  pair.integral = is_integral(g) && is_integral(h);
  const double defect = (g * h - h * g).cwiseAbs().maxCoeff();
  if (pair.integral ? defect != 0.0 : defect > kCommuteTolerance)
    throw Error(Errc::NotCommuting, "||gh - hg||_max = " + std::to_string(defect));
  pair.g = std::move(g);
  pair.h = std::move(h);
  return pair;
}

double pair_norm(const CommutingPair& pair, std::int64_t m, std::int64_t n) {
  if (m < 0 || n < 0) domain("pair exponents must be non-negative");
  if (pair.integral) {
    const auto d = static_cast<std::size_t>(pair.g.rows());
    return integral_pair_norm(big_mul(big_power(to_big(pair.h), m, d), big_power(to_big(pair.g), n, d), d), d);
  }
  Scaled a = scaled_power(pair.h, m);
  const Scaled b = scaled_power(pair.g, n);
  a.value = a.value * b.value;
  a.log_scale += b.log_scale;
  a.normalize();
  return norm_of(a).norm;
}

PairCounting pair_counting_check(const CommutingPair& pair, std::span<const std::int64_t> m_grid, std::int64_t K,
                                 std::int64_t n_max) {
  auto cache = std::make_shared<std::map<std::pair<std::int64_t, std::int64_t>, double>>();
  const sequences::BFunction b = [&pair, cache](std::int64_t m, std::int64_t k) {
    const auto key = std::make_pair(m, k);
    if (auto it = cache->find(key); it != cache->end()) return it->second;
    const double v = pair_norm(pair, m, k);
    cache->emplace(key, v);
    return v;
  };
  PairCounting out;
  out.row = sequences::check_b_condition(b, sequences::Orientation::row, m_grid, K, n_max);
  out.column = sequences::check_b_condition(b, sequences::Orientation::column, m_grid, K, n_max);
  return out;
}

BalanceReport hyperbolic_balance_bound(const CommutingPair& pair, std::int64_t m, std::int64_t n_lo,
                                       std::int64_t n_hi) {
  if (m < 0 || n_lo < 0 || n_hi < n_lo) domain("need m >= 0 and 0 <= n_lo <= n_hi");
  const auto d = pair.g.rows();
  // A generic combination shares the simultaneous eigenvectors.
  const Eigen::EigenSolver<Matrix> es(pair.g + 0.7548776662466927 * pair.h);
  const CMatrix V = es.eigenvectors();
  const Eigen::JacobiSVD<CMatrix> vsvd(V);
  const auto& vs = vsvd.singularValues();
  if (!(vs(d - 1) > 1e-10 * vs(0)))
    throw Error(Errc::HypothesisFailed, "pair is not simultaneously diagonalizable");
  const CMatrix Vinv = V.inverse();
  const CMatrix Dg = Vinv * pair.g.cast<std::complex<double>>() * V;
  const CMatrix Dh = Vinv * pair.h.cast<std::complex<double>>() * V;
  const double off_tol = 1e-8 * std::max({1.0, spectral_norm(pair.g), spectral_norm(pair.h)});
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (i != j && (std::abs(Dg(i, j)) > off_tol || std::abs(Dh(i, j)) > off_tol))
        throw Error(Errc::HypothesisFailed, "pair is not simultaneously diagonalizable");

  struct Eig {
    double log_s, log_t;
  };
  std::vector<Eig> plus, minus;
  bool g_unit = true, h_unit = true;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double as = std::abs(Dg(i, i)), at = std::abs(Dh(i, i));
    const bool sp = as > 1.0 + kEigenTolerance, sm = as < 1.0 - kEigenTolerance;
    const bool tp = at > 1.0 + kEigenTolerance, tm = at < 1.0 - kEigenTolerance;
    g_unit = g_unit && !sp && !sm;
    h_unit = h_unit && !tp && !tm;
    if (sp != tm || sm != tp)
      throw Error(Errc::HypothesisFailed,
                  "a simultaneous eigenvector is not expanded by exactly one of g and h");
    if (sp) plus.push_back({std::log(as), std::log(at)});
    if (sm) minus.push_back({std::log(as), std::log(at)});
  }
  if (g_unit || h_unit) throw Error(Errc::HypothesisFailed, "g and h must both be non-quasi-unipotent");

  BalanceReport rep;
  rep.det_g = pair.g.determinant();
  rep.det_h = pair.h.determinant();
  rep.unimodular = std::abs(std::abs(rep.det_g) - 1.0) <= 1e-9 && std::abs(std::abs(rep.det_h) - 1.0) <= 1e-9;
  const double md = static_cast<double>(m);
  rep.k = std::numeric_limits<std::int64_t>::max();
  rep.base = std::numeric_limits<double>::infinity();
  for (const auto& e : plus) {
    // first n with n log|s| + m log|t_s| >= 0
    const double x = md * -e.log_t / e.log_s;
    rep.k = std::min(rep.k, static_cast<std::int64_t>(std::max(0.0, std::ceil(x - 1e-9))));
    rep.base = std::min(rep.base, std::exp(e.log_s));
  }
  for (const auto& e : minus) rep.base = std::min(rep.base, std::exp(-e.log_s));

  rep.holds = true;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) {
    const double nd = static_cast<double>(n);
    double top_plus = -std::numeric_limits<double>::infinity(), top_minus = top_plus;
    for (const auto& e : plus) top_plus = std::max(top_plus, nd * e.log_s + md * e.log_t);
    for (const auto& e : minus) top_minus = std::max(top_minus, nd * e.log_s + md * e.log_t);
    BalanceRow row;
    row.n = n;
    row.norm = pair_norm(pair, m, n);
    row.two_eigen = 0.5 * (std::exp(top_plus) + std::exp(top_minus));
    row.curve = 0.5 * std::pow(rep.base, static_cast<double>(std::llabs(n - rep.k) - 1));
    row.holds = row.norm >= row.two_eigen * (1.0 - 1e-9) && row.two_eigen >= row.curve * (1.0 - 1e-9);
    rep.holds = rep.holds && row.holds;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace ergolab::matrix_growth
