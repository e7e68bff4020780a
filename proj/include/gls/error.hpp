#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gls {

enum class ErrorCode {
  invalid_parameter,
  empty_domain,
  empty_intersection,
  insufficient_grid,
  below_validity,
  insufficient_points,
  degenerate_fit,
  nonpositive_parameter,
  constraint_violation,
  empty_output_domain,
  arity_mismatch,
  incompatible_grids,
  missing_periodicity,
  resource_limit,
  exponent_out_of_range,
  unrepresentable_scale,
  domain_mismatch,
  numeric_overflow,
  parse_error,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::empty_domain: return "empty-domain";
    case ErrorCode::empty_intersection: return "empty-intersection";
    case ErrorCode::insufficient_grid: return "insufficient-grid";
    case ErrorCode::below_validity: return "below-validity";
    case ErrorCode::insufficient_points: return "insufficient-points";
    case ErrorCode::degenerate_fit: return "degenerate-fit";
    case ErrorCode::nonpositive_parameter: return "nonpositive-parameter";
    case ErrorCode::constraint_violation: return "constraint-violation";
    case ErrorCode::empty_output_domain: return "empty-output-domain";
    case ErrorCode::arity_mismatch: return "arity-mismatch";
    case ErrorCode::incompatible_grids: return "incompatible-grids";
    case ErrorCode::missing_periodicity: return "missing-periodicity";
    case ErrorCode::resource_limit: return "resource-limit";
    case ErrorCode::exponent_out_of_range: return "exponent-out-of-range";
    case ErrorCode::unrepresentable_scale: return "unrepresentable-scale";
    case ErrorCode::domain_mismatch: return "domain-mismatch";
    case ErrorCode::numeric_overflow: return "numeric-overflow";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gls
