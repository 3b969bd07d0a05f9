#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergolab {

// Error codes raised by the library. Each code belongs to exactly one module;
// qualified_code() renders it as "<module>.<Code>" for run summaries.
enum class Errc {
  // systems
  NotAperiodic,
  IncompatibleSupport,
  NotStochastic,
  NotUnimodular,
  NotHyperbolic,
  WindowExhausted,
  VariantMismatch,
  InvalidSystem,
  // sequences
  NonPositiveTerm,
  DomainError,
  // correlations
  NotCylinder,
  NotTrig,
  SpanTooLarge,
  FrequencyOverflow,
  InsufficientData,
  SubsetMissing,
  KTooLarge,
  // averages
  PrecisionBudget,
  // dyadic
  ShapeMismatch,
  // matrix_growth
  Singular,
  Overflow,
  FitInconsistent,
  HypothesisFailed,
  Indeterminate,
  NotCommuting,
  // cli
  InvalidConfig,
};

std::string_view code_name(Errc code) noexcept;
std::string_view module_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  // DomainError is shared by several modules; the thrower names its module.
  Error(Errc code, const std::string& message, std::string_view module = {});

  Errc code() const noexcept { return code_; }
  std::string_view module() const noexcept { return module_; }
  std::string qualified_code() const;

 private:
  Errc code_;
  std::string_view module_;
};

}  // namespace ergolab
