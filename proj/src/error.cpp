#include "ergolab/error.hpp"

namespace ergolab {

std::string_view code_name(Errc code) noexcept {
  switch (code) {
    case Errc::NotAperiodic: return "NotAperiodic";
    case Errc::IncompatibleSupport: return "IncompatibleSupport";
    case Errc::NotStochastic: return "NotStochastic";
    case Errc::NotUnimodular: return "NotUnimodular";
    case Errc::NotHyperbolic: return "NotHyperbolic";
    case Errc::WindowExhausted: return "WindowExhausted";
    case Errc::VariantMismatch: return "VariantMismatch";
    case Errc::InvalidSystem: return "InvalidSystem";
    case Errc::NonPositiveTerm: return "NonPositiveTerm";
    case Errc::DomainError: return "DomainError";
    case Errc::NotCylinder: return "NotCylinder";
    case Errc::NotTrig: return "NotTrig";
    case Errc::SpanTooLarge: return "SpanTooLarge";
    case Errc::FrequencyOverflow: return "FrequencyOverflow";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::SubsetMissing: return "SubsetMissing";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::PrecisionBudget: return "PrecisionBudget";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::Singular: return "Singular";
    case Errc::Overflow: return "Overflow";
    case Errc::FitInconsistent: return "FitInconsistent";
    case Errc::HypothesisFailed: return "HypothesisFailed";
    case Errc::Indeterminate: return "Indeterminate";
    case Errc::NotCommuting: return "NotCommuting";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

std::string_view module_name(Errc code) noexcept {
  switch (code) {
    case Errc::NotAperiodic:
    case Errc::IncompatibleSupport:
    case Errc::NotStochastic:
    case Errc::NotUnimodular:
    case Errc::NotHyperbolic:
    case Errc::WindowExhausted:
    case Errc::VariantMismatch:
    case Errc::InvalidSystem:
      return "systems";
    case Errc::NonPositiveTerm:
    case Errc::DomainError:
      return "sequences";
    case Errc::NotCylinder:
    case Errc::NotTrig:
    case Errc::SpanTooLarge:
    case Errc::FrequencyOverflow:
    case Errc::InsufficientData:
    case Errc::SubsetMissing:
    case Errc::KTooLarge:
      return "correlations";
    case Errc::PrecisionBudget:
      return "averages";
    case Errc::ShapeMismatch:
      return "dyadic";
    case Errc::Singular:
    case Errc::Overflow:
    case Errc::FitInconsistent:
    case Errc::HypothesisFailed:
    case Errc::Indeterminate:
    case Errc::NotCommuting:
      return "matrix_growth";
    case Errc::InvalidConfig:
      return "cli";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message, std::string_view module)
    : std::runtime_error(message), code_(code), module_(module.empty() ? module_name(code) : module) {}

std::string Error::qualified_code() const {
  std::string out(module_);
  out += '.';
  out += code_name(code_);
  return out;
}

}  // namespace ergolab
