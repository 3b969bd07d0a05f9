#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ergolab/error.hpp"
#include "ergolab/rng.hpp"

namespace ergolab::systems {

// Symbols are labelled 1..m in every public interface.
using Symbol = int;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using u128 = unsigned __int128;

// ---------------------------------------------------------------------------
// Subshift of finite type with a stationary Markov measure.

class ShiftSystem {
 public:
  int alphabet_size() const noexcept { return static_cast<int>(stationary_.size()); }
  const Eigen::MatrixXi& adjacency() const noexcept { return adjacency_; }
  const Eigen::MatrixXd& transition() const noexcept { return transition_; }
  const Eigen::VectorXd& stationary() const noexcept { return stationary_; }
  // Time-reversed chain: stationary[j] * transition[j][i] / stationary[i].
  const Eigen::MatrixXd& reversed_transition() const noexcept { return reversed_; }
  // Two-sided shifts are invertible; one-sided factors (e.g. the doubling map
  // as the one-sided full 2-shift) are not, and reject negative times.
  bool invertible() const noexcept { return invertible_; }

  // 0-based sampling helpers.
  int draw_initial(double u) const noexcept;
  int draw_next(int from, double u) const noexcept;
  int draw_previous(int from, double u) const noexcept;

 private:
  friend ShiftSystem build_shift(const Eigen::MatrixXi&, const Eigen::MatrixXd&, bool);

  Eigen::MatrixXi adjacency_;
  Eigen::MatrixXd transition_;
  Eigen::MatrixXd reversed_;
  Eigen::VectorXd stationary_;
  std::vector<double> cumulative_initial_;
  std::vector<double> cumulative_forward_;   // row-major m x m
  std::vector<double> cumulative_backward_;  // row-major m x m
  bool invertible_ = true;
};

// Throws NotAperiodic, IncompatibleSupport or NotStochastic.
ShiftSystem build_shift(const Eigen::MatrixXi& adjacency, const Eigen::MatrixXd& transition,
                        bool invertible = true);

// Full shift with i.i.d. symbols of the given law.
ShiftSystem bernoulli_shift(std::span<const double> probabilities, bool invertible = true);

// True when some power k <= (m-1)^2 + 1 of the 0/1 matrix is strictly positive.
bool is_aperiodic(const Eigen::MatrixXi& adjacency);

// Left fixed probability vector of an irreducible stochastic matrix
// (Grassmann-Taksar-Heyman elimination, subtraction free).
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

// Read-only view of a contiguous run of 0-based symbols at absolute indices
// [lo, lo + size).
struct WindowView {
  const std::uint8_t* data = nullptr;
  std::int64_t lo = 0;
  std::int64_t size = 0;

  std::int64_t hi() const noexcept { return lo + size - 1; }
  bool covers(std::int64_t a, std::int64_t b) const noexcept { return a >= lo && b <= hi(); }
  int at(std::int64_t index) const noexcept { return data[index - lo]; }
};

// A point of the shift, stored as a finite window of the bi-infinite sequence
// plus an origin. Shifting moves the origin; the symbols are shared.
class ShiftPoint {
 public:
  ShiftPoint(std::shared_ptr<const std::vector<std::uint8_t>> symbols, std::int64_t lo,
             std::int64_t origin = 0);

  std::int64_t window_lo() const noexcept { return lo_; }
  std::int64_t window_hi() const noexcept { return lo_ + static_cast<std::int64_t>(symbols_->size()) - 1; }
  std::int64_t origin() const noexcept { return origin_; }

  // Symbol (1..m) at the given offset from the current origin.
  Symbol at(std::int64_t offset) const;
  ShiftPoint shifted(std::int64_t n) const {
    ShiftPoint p = *this;
    p.origin_ += n;
    return p;
  }
  WindowView view() const noexcept {
    return {symbols_->data(), lo_, static_cast<std::int64_t>(symbols_->size())};
  }

  friend bool operator==(const ShiftPoint& a, const ShiftPoint& b);

 private:
  std::shared_ptr<const std::vector<std::uint8_t>> symbols_;
  std::int64_t lo_;
  std::int64_t origin_;
};

// Samples a window [-W, W] from the Markov measure: index 0 from the stationary
// law, forward by the transition matrix, backward by the reversed chain.
ShiftPoint sample_shift_point(const ShiftSystem& system, std::int64_t W, std::uint64_t seed);

// Fills out[i] with the 0-based symbol at absolute index lo + i. The symbol at
// `anchor` (clamped into the window) is drawn from the stationary law.
void fill_window(const ShiftSystem& system, std::int64_t lo, std::span<std::uint8_t> out, Rng& rng,
                 std::int64_t anchor);

ShiftPoint sample_shift_window(const ShiftSystem& system, std::int64_t lo, std::int64_t hi, Rng& rng);

ShiftPoint shift_apply(const ShiftPoint& point, std::int64_t n);

// ---------------------------------------------------------------------------
// Hyperbolic toral automorphisms acting exactly on (2^-q Z / Z)^d.

// d x d matrix with entries modulo 2^128 (row-major); reduction modulo 2^q is
// applied by masking.
struct ModMatrix {
  int dim = 0;
  std::vector<u128> entries;

  u128 operator()(int r, int c) const { return entries[static_cast<std::size_t>(r * dim + c)]; }
  u128& operator()(int r, int c) { return entries[static_cast<std::size_t>(r * dim + c)]; }
};

ModMatrix mod_identity(int dim);
ModMatrix mod_multiply(const ModMatrix& a, const ModMatrix& b, u128 mask);

class TorusAutomorphism {
 public:
  int dimension() const noexcept { return static_cast<int>(matrix_.rows()); }
  int precision_bits() const noexcept { return precision_bits_; }
  const IntMatrix& matrix() const noexcept { return matrix_; }
  u128 mask() const noexcept { return mask_; }
  const ModMatrix& forward() const noexcept { return forward_; }
  const ModMatrix& inverse() const noexcept { return inverse_; }

 private:
  friend TorusAutomorphism build_torus(const IntMatrix&, int);

  IntMatrix matrix_;
  int precision_bits_ = 128;
  u128 mask_ = 0;
  ModMatrix forward_;
  ModMatrix inverse_;
};

// Throws NotUnimodular when |det| != 1 and NotHyperbolic when an eigenvalue
// modulus lies within 1e-9 of 1.
TorusAutomorphism build_torus(const IntMatrix& matrix, int precision_bits = 128);

struct TorusPoint {
  std::vector<u128> coords;  // coordinate value * 2^q
  int precision_bits = 128;

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

TorusPoint make_torus_point(std::span<const double> values, int precision_bits = 128);
TorusPoint sample_torus_point(const TorusAutomorphism& automorphism, Rng& rng);
double coordinate_value(u128 coord, int precision_bits);

// matrix^n modulo 2^q by square-and-multiply; negative n uses the inverse.
ModMatrix mod_power(const TorusAutomorphism& automorphism, std::int64_t n);
TorusPoint apply(const ModMatrix& m, const TorusPoint& point, u128 mask);
TorusPoint torus_apply_power(const TorusAutomorphism& automorphism, const TorusPoint& point,
                             std::int64_t n);

// ---------------------------------------------------------------------------
// Observables.

struct TrigTerm {
  std::vector<std::int64_t> frequency;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

class Observable {
 public:
  enum class Kind { cylinder, trig };

  // Value table over words (x_{-w}, ..., x_w) encoded base m with 0-based
  // digits, x_{-w} most significant. Size must be m^(2w+1).
  static Observable cylinder(int alphabet_size, int radius, std::vector<double> table);
  // Table built from fn on admissible words; inadmissible words get 0.
  static Observable cylinder(const ShiftSystem& system, int radius,
                             const std::function<double(std::span<const Symbol>)>& fn);
  static Observable trig(int dimension, std::vector<TrigTerm> terms);

  Kind kind() const noexcept { return kind_; }
  int radius() const noexcept { return radius_; }
  int alphabet_size() const noexcept { return alphabet_; }
  int dimension() const noexcept { return dimension_; }
  const std::vector<double>& table() const noexcept { return table_; }
  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }

  // Upper bound on |f|: exact for cylinders, sum of |coefficients| for trig.
  double sup_norm() const;
  Observable plus_constant(double c) const;
  Observable scaled(double factor) const;

  // Cylinder value at the word centred on absolute index `center`.
  double value_at(const WindowView& window, std::int64_t center) const;
  double value_at(const TorusPoint& point) const;

 private:
  Kind kind_ = Kind::cylinder;
  int radius_ = 0;
  int alphabet_ = 0;
  int dimension_ = 0;
  std::vector<double> table_;
  std::vector<TrigTerm> terms_;
};

Observable indicator(const ShiftSystem& system, Symbol symbol, int offset = 0);
// Indicator of x_{offset} ... x_{offset + len - 1} = word.
Observable word_indicator(const ShiftSystem& system, std::span<const Symbol> word, int offset = 0);
Observable constant(const ShiftSystem& system, double value);
Observable character(std::vector<std::int64_t> frequency, double cos_coef, double sin_coef);

using System = std::variant<ShiftSystem, TorusAutomorphism>;
using Point = std::variant<ShiftPoint, TorusPoint>;

double eval(const Observable& f, const ShiftPoint& point);
double eval(const Observable& f, const TorusPoint& point);
double eval(const Observable& f, const Point& point);

double exact_mean(const Observable& f, const ShiftSystem& system);
double exact_mean(const Observable& f, const TorusAutomorphism& automorphism);
double exact_mean(const Observable& f, const System& system);

// Throws VariantMismatch when f cannot be evaluated on the system.
void check_compatible(const Observable& f, const System& system);

bool system_invertible(const System& system);

}  // namespace ergolab::systems
