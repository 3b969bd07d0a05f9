#include "ergolab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace ergolab::systems {

namespace {

using BigInt = boost::multiprecision::cpp_int;

constexpr std::size_t kMaxTableSize = std::size_t{1} << 26;

std::vector<double> cumulative(const Eigen::MatrixXd& rows) {
  const auto m = rows.rows();
  std::vector<double> out(static_cast<std::size_t>(m * rows.cols()));
  for (Eigen::Index i = 0; i < m; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      acc += rows(i, j);
      out[static_cast<std::size_t>(i * rows.cols() + j)] = acc;
    }
  }
  return out;
}

int draw_from(const double* cum, int m, double u) noexcept {
  // Scale by the row total so accumulated rounding never leaves a gap.
  const double target = u * cum[m - 1];
  for (int j = 0; j < m; ++j)
    if (target < cum[j]) return j;
  // u * total rounded up to total: take the last symbol with positive mass.
  for (int j = m - 1; j > 0; --j)
    if (cum[j] > cum[j - 1]) return j;
  return 0;
}

std::size_t checked_pow(int base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    out *= static_cast<std::size_t>(base);
    if (out > kMaxTableSize)
      throw Error(Errc::InvalidSystem, "cylinder table too large: alphabet " + std::to_string(base) +
                                           ", word length " + std::to_string(exponent));
  }
  return out;
}

BigInt exact_determinant(const IntMatrix& a) {
  // Bareiss fraction-free elimination.
  const int n = static_cast<int>(a.rows());
  std::vector<std::vector<BigInt>> m(n, std::vector<BigInt>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = a(i, j);
  BigInt sign = 1;
  BigInt prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k] == 0) {
      int swap = -1;
      for (int i = k + 1; i < n; ++i)
        if (m[i][k] != 0) {
          swap = i;
          break;
        }
      if (swap < 0) return 0;
      std::swap(m[k], m[swap]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

u128 odd_inverse(u128 a) {
  u128 x = a;  // correct to 3 bits for odd a
  for (int i = 0; i < 6; ++i) x *= u128{2} - a * x;
  return x;
}

// Inverse modulo 2^128 of a matrix with odd determinant, by Gauss-Jordan
// elimination with odd (unit) pivots.
ModMatrix mod_inverse_matrix(ModMatrix a) {
  const int n = a.dim;
  ModMatrix inv = mod_identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (a(r, col) & 1U) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw Error(Errc::NotUnimodular, "matrix is not invertible modulo 2");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    const u128 scale = odd_inverse(a(col, col));
    for (int c = 0; c < n; ++c) {
      a(col, c) *= scale;
      inv(col, c) *= scale;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const u128 factor = a(r, col);
      if (factor == 0) continue;
      for (int c = 0; c < n; ++c) {
        a(r, c) -= factor * a(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

u128 to_mod(std::int64_t v) { return static_cast<u128>(static_cast<__int128>(v)); }

}  // namespace

// ---------------------------------------------------------------------------

int ShiftSystem::draw_initial(double u) const noexcept {
  return draw_from(cumulative_initial_.data(), alphabet_size(), u);
}

int ShiftSystem::draw_next(int from, double u) const noexcept {
  const int m = alphabet_size();
  return draw_from(cumulative_forward_.data() + static_cast<std::ptrdiff_t>(from) * m, m, u);
}

int ShiftSystem::draw_previous(int from, double u) const noexcept {
  const int m = alphabet_size();
  return draw_from(cumulative_backward_.data() + static_cast<std::ptrdiff_t>(from) * m, m, u);
}

bool is_aperiodic(const Eigen::MatrixXi& adjacency) {
  const auto m = adjacency.rows();
  if (m == 0 || adjacency.cols() != m) return false;
  Eigen::MatrixXi base = (adjacency.array() != 0).cast<int>();
  Eigen::MatrixXi power = base;
  const long limit = (m - 1) * (m - 1) + 1;
  for (long k = 1; k <= limit; ++k) {
    if ((power.array() > 0).all()) return true;
    power = ((power * base).array() > 0).cast<int>();
  }
  return false;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const auto n = transition.rows();
  Eigen::MatrixXd p = transition;
  for (Eigen::Index k = n - 1; k > 0; --k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += p(k, j);
    if (!(s > 0.0)) throw Error(Errc::InvalidSystem, "transition matrix is reducible");
    for (Eigen::Index i = 0; i < k; ++i) p(i, k) /= s;
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) p(i, j) += p(i, k) * p(k, j);
  }
  Eigen::VectorXd pi(n);
  pi(0) = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < j; ++i) acc += pi(i) * p(i, j);
    pi(j) = acc;
  }
  return pi / pi.sum();
}

ShiftSystem build_shift(const Eigen::MatrixXi& adjacency, const Eigen::MatrixXd& transition,
                        bool invertible) {
  const auto m = adjacency.rows();
  if (m < 2 || adjacency.cols() != m || transition.rows() != m || transition.cols() != m)
    throw Error(Errc::InvalidSystem, "adjacency and transition must be square of equal size >= 2");
  if (m > 255) throw Error(Errc::InvalidSystem, "alphabet larger than 255 symbols");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (adjacency(i, j) != 0 && adjacency(i, j) != 1)
        throw Error(Errc::InvalidSystem, "adjacency entries must be 0 or 1");
      if (!std::isfinite(transition(i, j)) || transition(i, j) < 0.0)
        throw Error(Errc::NotStochastic, "transition entries must be finite and non-negative");
    }
  if (!is_aperiodic(adjacency))
    throw Error(Errc::NotAperiodic, "no power of the adjacency matrix up to (m-1)^2+1 is positive");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if ((transition(i, j) > 0.0) != (adjacency(i, j) == 1)) {
        std::ostringstream msg;
        msg << "transition support differs from adjacency at (" << i + 1 << ", " << j + 1 << ")";
        throw Error(Errc::IncompatibleSupport, msg.str());
      }
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sum = transition.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "transition row " << i + 1 << " sums to " << sum;
      throw Error(Errc::NotStochastic, msg.str());
    }
  }

  ShiftSystem s;
  s.adjacency_ = adjacency;
  s.transition_ = transition;
  // Renormalise rows to the 1e-12 invariant after the 1e-9 admission check.
  for (Eigen::Index i = 0; i < m; ++i) s.transition_.row(i) /= s.transition_.row(i).sum();
  s.stationary_ = stationary_distribution(s.transition_);
  s.reversed_.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j)
      s.reversed_(i, j) = s.stationary_(j) * s.transition_(j, i) / s.stationary_(i);
    s.reversed_.row(i) /= s.reversed_.row(i).sum();
  }
  s.cumulative_initial_ = cumulative(s.stationary_.transpose());
  s.cumulative_forward_ = cumulative(s.transition_);
  s.cumulative_backward_ = cumulative(s.reversed_);
  s.invertible_ = invertible;
  return s;
}

ShiftSystem bernoulli_shift(std::span<const double> probabilities, bool invertible) {
  const auto m = static_cast<Eigen::Index>(probabilities.size());
  Eigen::MatrixXi adjacency = Eigen::MatrixXi::Ones(m, m);
  Eigen::MatrixXd transition(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) transition(i, j) = probabilities[static_cast<std::size_t>(j)];
  return build_shift(adjacency, transition, invertible);
}

// ---------------------------------------------------------------------------

ShiftPoint::ShiftPoint(std::shared_ptr<const std::vector<std::uint8_t>> symbols, std::int64_t lo,
                       std::int64_t origin)
    : symbols_(std::move(symbols)), lo_(lo), origin_(origin) {}

Symbol ShiftPoint::at(std::int64_t offset) const {
  const std::int64_t index = origin_ + offset;
  if (index < window_lo() || index > window_hi())
    throw Error(Errc::WindowExhausted, "index " + std::to_string(index) + " outside window [" +
                                           std::to_string(window_lo()) + ", " +
                                           std::to_string(window_hi()) + "]");
  return static_cast<Symbol>((*symbols_)[static_cast<std::size_t>(index - lo_)]) + 1;
}

bool operator==(const ShiftPoint& a, const ShiftPoint& b) {
  return a.origin_ == b.origin_ && a.lo_ == b.lo_ && *a.symbols_ == *b.symbols_;
}

void fill_window(const ShiftSystem& system, std::int64_t lo, std::span<std::uint8_t> out, Rng& rng,
                 std::int64_t anchor) {
  if (out.empty()) return;
  const auto size = static_cast<std::int64_t>(out.size());
  const std::int64_t a = std::clamp(anchor, lo, lo + size - 1) - lo;
  int current = system.draw_initial(uniform01(rng));
  out[static_cast<std::size_t>(a)] = static_cast<std::uint8_t>(current);
  for (std::int64_t i = a + 1; i < size; ++i) {
    current = system.draw_next(current, uniform01(rng));
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(current);
  }
  current = out[static_cast<std::size_t>(a)];
  for (std::int64_t i = a - 1; i >= 0; --i) {
    current = system.draw_previous(current, uniform01(rng));
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(current);
  }
}

ShiftPoint sample_shift_point(const ShiftSystem& system, std::int64_t W, std::uint64_t seed) {
  if (W < 0) throw Error(Errc::DomainError, "window half-width must be non-negative", "systems");
  Rng rng(seed);
  auto symbols = std::make_shared<std::vector<std::uint8_t>>(static_cast<std::size_t>(2 * W + 1));
  fill_window(system, -W, *symbols, rng, 0);
  return ShiftPoint(std::move(symbols), -W, 0);
}

ShiftPoint sample_shift_window(const ShiftSystem& system, std::int64_t lo, std::int64_t hi, Rng& rng) {
  if (hi < lo) throw Error(Errc::DomainError, "empty window", "systems");
  auto symbols = std::make_shared<std::vector<std::uint8_t>>(static_cast<std::size_t>(hi - lo + 1));
  fill_window(system, lo, *symbols, rng, std::clamp<std::int64_t>(0, lo, hi));
  return ShiftPoint(std::move(symbols), lo, 0);
}

ShiftPoint shift_apply(const ShiftPoint& point, std::int64_t n) { return point.shifted(n); }

// ---------------------------------------------------------------------------

ModMatrix mod_identity(int dim) {
  ModMatrix m{dim, std::vector<u128>(static_cast<std::size_t>(dim * dim), 0)};
  for (int i = 0; i < dim; ++i) m(i, i) = 1;
  return m;
}

ModMatrix mod_multiply(const ModMatrix& a, const ModMatrix& b, u128 mask) {
  const int n = a.dim;
  ModMatrix out{n, std::vector<u128>(static_cast<std::size_t>(n * n), 0)};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const u128 aik = a(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
    }
  for (auto& e : out.entries) e &= mask;
  return out;
}

TorusAutomorphism build_torus(const IntMatrix& matrix, int precision_bits) {
  const auto d = matrix.rows();
  if (d < 2 || matrix.cols() != d) throw Error(Errc::InvalidSystem, "torus matrix must be square, d >= 2");
  if (precision_bits < 1 || precision_bits > 128)
    throw Error(Errc::InvalidSystem, "precision_bits must lie in [1, 128]");
  const BigInt det = exact_determinant(matrix);
  if (det != 1 && det != -1)
    throw Error(Errc::NotUnimodular, "determinant is " + det.str() + ", expected +-1");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix.cast<double>(), false);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double modulus = std::abs(solver.eigenvalues()(i));
    if (std::abs(modulus - 1.0) <= 1e-9)
      throw Error(Errc::NotHyperbolic, "eigenvalue of modulus within 1e-9 of 1");
  }

  TorusAutomorphism t;
  t.matrix_ = matrix;
  t.precision_bits_ = precision_bits;
  t.mask_ = precision_bits == 128 ? ~u128{0} : ((u128{1} << precision_bits) - 1);
  t.forward_ = mod_identity(static_cast<int>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.forward_(i, j) = to_mod(matrix(i, j));
  t.inverse_ = mod_inverse_matrix(t.forward_);
  for (auto& e : t.forward_.entries) e &= t.mask_;
  for (auto& e : t.inverse_.entries) e &= t.mask_;
  return t;
}

TorusPoint make_torus_point(std::span<const double> values, int precision_bits) {
  TorusPoint p;
  p.precision_bits = precision_bits;
  for (double v : values) {
    double frac = v - std::floor(v);
    const double hi = std::floor(std::ldexp(frac, 64));
    const double lo = std::floor(std::ldexp(std::ldexp(frac, 64) - hi, 64));
    u128 c = (static_cast<u128>(static_cast<std::uint64_t>(hi)) << 64) |
             static_cast<u128>(static_cast<std::uint64_t>(lo));
    p.coords.push_back(c >> (128 - precision_bits));
  }
  return p;
}

TorusPoint sample_torus_point(const TorusAutomorphism& automorphism, Rng& rng) {
  TorusPoint p;
  p.precision_bits = automorphism.precision_bits();
  p.coords.resize(static_cast<std::size_t>(automorphism.dimension()));
  for (auto& c : p.coords) {
    const u128 hi = rng();
    const u128 lo = rng();
    c = ((hi << 64) | lo) & automorphism.mask();
  }
  return p;
}

double coordinate_value(u128 coord, int precision_bits) {
  const long double hi = static_cast<long double>(static_cast<std::uint64_t>(coord >> 64));
  const long double lo = static_cast<long double>(static_cast<std::uint64_t>(coord));
  const long double whole = std::ldexp(hi, 64) + lo;
  return static_cast<double>(std::ldexp(whole, -precision_bits));
}

ModMatrix mod_power(const TorusAutomorphism& automorphism, std::int64_t n) {
  ModMatrix base = n >= 0 ? automorphism.forward() : automorphism.inverse();
  std::uint64_t e = n >= 0 ? static_cast<std::uint64_t>(n) : static_cast<std::uint64_t>(-(n + 1)) + 1;
  ModMatrix result = mod_identity(automorphism.dimension());
  while (e > 0) {
    if (e & 1U) result = mod_multiply(result, base, automorphism.mask());
    e >>= 1;
    if (e > 0) base = mod_multiply(base, base, automorphism.mask());
  }
  return result;
}

TorusPoint apply(const ModMatrix& m, const TorusPoint& point, u128 mask) {
  TorusPoint out;
  out.precision_bits = point.precision_bits;
  out.coords.assign(point.coords.size(), 0);
  for (int i = 0; i < m.dim; ++i) {
    u128 acc = 0;
    for (int j = 0; j < m.dim; ++j) acc += m(i, j) * point.coords[static_cast<std::size_t>(j)];
    out.coords[static_cast<std::size_t>(i)] = acc & mask;
  }
  return out;
}

TorusPoint torus_apply_power(const TorusAutomorphism& automorphism, const TorusPoint& point,
                             std::int64_t n) {
  if (static_cast<int>(point.coords.size()) != automorphism.dimension() ||
      point.precision_bits != automorphism.precision_bits())
    throw Error(Errc::VariantMismatch, "torus point does not match the automorphism");
  if (n == 0) return point;
  return apply(mod_power(automorphism, n), point, automorphism.mask());
}

// ---------------------------------------------------------------------------

Observable Observable::cylinder(int alphabet_size, int radius, std::vector<double> table) {
  if (alphabet_size < 2 || radius < 0)
    throw Error(Errc::InvalidSystem, "cylinder needs alphabet >= 2 and radius >= 0");
  const std::size_t expected = checked_pow(alphabet_size, 2 * radius + 1);
  if (table.size() != expected)
    throw Error(Errc::InvalidSystem, "cylinder table has " + std::to_string(table.size()) +
                                         " entries, expected " + std::to_string(expected));
  for (double v : table)
    if (!std::isfinite(v)) throw Error(Errc::InvalidSystem, "cylinder values must be finite");
  Observable f;
  f.kind_ = Kind::cylinder;
  f.radius_ = radius;
  f.alphabet_ = alphabet_size;
  f.table_ = std::move(table);
  return f;
}

Observable Observable::cylinder(const ShiftSystem& system, int radius,
                                const std::function<double(std::span<const Symbol>)>& fn) {
  const int m = system.alphabet_size();
  const int length = 2 * radius + 1;
  const std::size_t size = checked_pow(m, length);
  std::vector<double> table(size, 0.0);
  std::vector<Symbol> word(static_cast<std::size_t>(length));
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::size_t rest = idx;
    for (int p = length - 1; p >= 0; --p) {
      word[static_cast<std::size_t>(p)] = static_cast<Symbol>(rest % static_cast<std::size_t>(m)) + 1;
      rest /= static_cast<std::size_t>(m);
    }
    bool admissible = true;
    for (int p = 0; p + 1 < length && admissible; ++p)
      admissible = system.adjacency()(word[static_cast<std::size_t>(p)] - 1,
                                      word[static_cast<std::size_t>(p + 1)] - 1) == 1;
    if (admissible) table[idx] = fn(word);
  }
  return cylinder(m, radius, std::move(table));
}

Observable Observable::trig(int dimension, std::vector<TrigTerm> terms) {
  if (dimension < 1) throw Error(Errc::InvalidSystem, "trig observable needs dimension >= 1");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (static_cast<int>(terms[i].frequency.size()) != dimension)
      throw Error(Errc::InvalidSystem, "trig frequency has wrong dimension");
    if (!std::isfinite(terms[i].cos_coef) || !std::isfinite(terms[i].sin_coef))
      throw Error(Errc::InvalidSystem, "trig coefficients must be finite");
    for (std::size_t j = 0; j < i; ++j)
      if (terms[j].frequency == terms[i].frequency)
        throw Error(Errc::InvalidSystem, "trig frequency vectors must be pairwise distinct");
  }
  Observable f;
  f.kind_ = Kind::trig;
  f.dimension_ = dimension;
  f.terms_ = std::move(terms);
  return f;
}

double Observable::sup_norm() const {
  double out = 0.0;
  if (kind_ == Kind::cylinder) {
    for (double v : table_) out = std::max(out, std::abs(v));
  } else {
    for (const auto& t : terms_) {
      const bool zero = std::all_of(t.frequency.begin(), t.frequency.end(), [](auto k) { return k == 0; });
      out += zero ? std::abs(t.cos_coef) : std::hypot(t.cos_coef, t.sin_coef);
    }
  }
  return out;
}

Observable Observable::plus_constant(double c) const {
  Observable f = *this;
  if (kind_ == Kind::cylinder) {
    for (double& v : f.table_) v += c;
    return f;
  }
  for (auto& t : f.terms_)
    if (std::all_of(t.frequency.begin(), t.frequency.end(), [](auto k) { return k == 0; })) {
      t.cos_coef += c;
      return f;
    }
  f.terms_.push_back({std::vector<std::int64_t>(static_cast<std::size_t>(dimension_), 0), c, 0.0});
  return f;
}

Observable Observable::scaled(double factor) const {
  Observable f = *this;
  for (double& v : f.table_) v *= factor;
  for (auto& t : f.terms_) {
    t.cos_coef *= factor;
    t.sin_coef *= factor;
  }
  return f;
}

double Observable::value_at(const WindowView& window, std::int64_t center) const {
  if (kind_ != Kind::cylinder) throw Error(Errc::VariantMismatch, "trig observable evaluated on a shift point");
  const std::int64_t a = center - radius_;
  const std::int64_t b = center + radius_;
  if (!window.covers(a, b))
    throw Error(Errc::WindowExhausted, "cylinder at " + std::to_string(center) + " radius " +
                                           std::to_string(radius_) + " leaves window [" +
                                           std::to_string(window.lo) + ", " + std::to_string(window.hi()) + "]");
  std::size_t idx = 0;
  const auto m = static_cast<std::size_t>(alphabet_);
  for (std::int64_t i = a; i <= b; ++i) idx = idx * m + static_cast<std::size_t>(window.at(i));
  return table_[idx];
}

double Observable::value_at(const TorusPoint& point) const {
  if (kind_ != Kind::trig) throw Error(Errc::VariantMismatch, "cylinder observable evaluated on a torus point");
  if (static_cast<int>(point.coords.size()) != dimension_)
    throw Error(Errc::VariantMismatch, "torus point dimension differs from observable");
  const int q = point.precision_bits;
  const u128 mask = q == 128 ? ~u128{0} : ((u128{1} << q) - 1);
  constexpr double two_pi = 6.283185307179586476925286766559;
  double out = 0.0;
  for (const auto& t : terms_) {
    u128 phase = 0;
    for (std::size_t i = 0; i < point.coords.size(); ++i) phase += to_mod(t.frequency[i]) * point.coords[i];
    const double angle = two_pi * coordinate_value(phase & mask, q);
    out += t.cos_coef * std::cos(angle) + t.sin_coef * std::sin(angle);
  }
  return out;
}

// ---------------------------------------------------------------------------

Observable indicator(const ShiftSystem& system, Symbol symbol, int offset) {
  const Symbol word[] = {symbol};
  return word_indicator(system, word, offset);
}

Observable word_indicator(const ShiftSystem& system, std::span<const Symbol> word, int offset) {
  if (word.empty()) throw Error(Errc::InvalidSystem, "empty word");
  for (Symbol s : word)
    if (s < 1 || s > system.alphabet_size()) throw Error(Errc::InvalidSystem, "symbol out of range");
  const int last = offset + static_cast<int>(word.size()) - 1;
  const int radius = std::max(std::abs(offset), std::abs(last));
  std::vector<Symbol> pattern(word.begin(), word.end());
  return Observable::cylinder(system, radius, [=](std::span<const Symbol> w) {
    for (std::size_t i = 0; i < pattern.size(); ++i)
      if (w[static_cast<std::size_t>(radius + offset) + i] != pattern[i]) return 0.0;
    return 1.0;
  });
}

Observable constant(const ShiftSystem& system, double value) {
  return Observable::cylinder(system, 0, [value](std::span<const Symbol>) { return value; });
}

Observable character(std::vector<std::int64_t> frequency, double cos_coef, double sin_coef) {
  const int d = static_cast<int>(frequency.size());
  return Observable::trig(d, {TrigTerm{std::move(frequency), cos_coef, sin_coef}});
}

double eval(const Observable& f, const ShiftPoint& point) { return f.value_at(point.view(), point.origin()); }

double eval(const Observable& f, const TorusPoint& point) { return f.value_at(point); }

double eval(const Observable& f, const Point& point) {
  return std::visit([&](const auto& p) { return eval(f, p); }, point);
}

double exact_mean(const Observable& f, const ShiftSystem& system) {
  if (f.kind() != Observable::Kind::cylinder || f.alphabet_size() != system.alphabet_size())
    throw Error(Errc::VariantMismatch, "observable is not a cylinder on this shift");
  const auto m = static_cast<std::size_t>(system.alphabet_size());
  const int length = 2 * f.radius() + 1;
  std::vector<double> weight(system.stationary().data(), system.stationary().data() + m);
  for (int step = 1; step < length; ++step) {
    std::vector<double> next(weight.size() * m, 0.0);
    for (std::size_t idx = 0; idx < weight.size(); ++idx) {
      if (weight[idx] == 0.0) continue;
      const auto last = static_cast<Eigen::Index>(idx % m);
      for (std::size_t s = 0; s < m; ++s)
        next[idx * m + s] = weight[idx] * system.transition()(last, static_cast<Eigen::Index>(s));
    }
    weight = std::move(next);
  }
  double out = 0.0;
  for (std::size_t idx = 0; idx < weight.size(); ++idx)
    if (weight[idx] != 0.0) out += weight[idx] * f.table()[idx];
  return out;
}

double exact_mean(const Observable& f, const TorusAutomorphism& automorphism) {
  if (f.kind() != Observable::Kind::trig || f.dimension() != automorphism.dimension())
    throw Error(Errc::VariantMismatch, "observable is not a trig polynomial on this torus");
  double mean = 0.0;
  for (const auto& t : f.terms())
    if (std::all_of(t.frequency.begin(), t.frequency.end(), [](auto k) { return k == 0; })) mean += t.cos_coef;
  return mean;
}

double exact_mean(const Observable& f, const System& system) {
  return std::visit([&](const auto& s) { return exact_mean(f, s); }, system);
}

void check_compatible(const Observable& f, const System& system) {
  if (const auto* shift = std::get_if<ShiftSystem>(&system)) {
    if (f.kind() != Observable::Kind::cylinder || f.alphabet_size() != shift->alphabet_size())
      throw Error(Errc::VariantMismatch, "observable is not a cylinder on this shift");
  } else {
    const auto& torus = std::get<TorusAutomorphism>(system);
    if (f.kind() != Observable::Kind::trig || f.dimension() != torus.dimension())
      throw Error(Errc::VariantMismatch, "observable is not a trig polynomial on this torus");
  }
}

bool system_invertible(const System& system) {
  if (const auto* shift = std::get_if<ShiftSystem>(&system)) return shift->invertible();
  return true;
}

}  // namespace ergolab::systems
