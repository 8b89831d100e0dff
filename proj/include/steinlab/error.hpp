#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steinlab {

enum class ErrorCode {
  // prob_model
  non_positive_prob,
  duplicate_atom,
  sum_not_one,
  empty_distribution,
  non_finite_value,
  grid_too_large,
  // functional construction / evaluation
  arity_mismatch,
  bad_arity,
  non_symmetric,
  nonzero_diagonal,
  window_out_of_range,
  // operator calculus
  axis_out_of_range,
  shape_mismatch,
  // bound assembly
  not_centered,
  degenerate_variance,
  not_a_weighted_sum,
  not_normalized,
  not_a_two_run,
  bad_moment_bound,
  unsupported_kind,
  not_integer_valued,
  non_positive_theta,
  unsupported_bound_form,
  // configuration / input
  invalid_argument,
  invalid_config,
  schema_error,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::non_positive_prob: return "NonPositiveProb";
    case ErrorCode::duplicate_atom: return "DuplicateAtom";
    case ErrorCode::sum_not_one: return "SumNotOne";
    case ErrorCode::empty_distribution: return "EmptyDistribution";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::grid_too_large: return "GridTooLarge";
    case ErrorCode::arity_mismatch: return "ArityMismatch";
    case ErrorCode::bad_arity: return "BadArity";
    case ErrorCode::non_symmetric: return "NonSymmetric";
    case ErrorCode::nonzero_diagonal: return "NonzeroDiagonal";
    case ErrorCode::window_out_of_range: return "WindowOutOfRange";
    case ErrorCode::axis_out_of_range: return "AxisOutOfRange";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::not_centered: return "NotCentered";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::not_a_weighted_sum: return "NotAWeightedSum";
    case ErrorCode::not_normalized: return "NotNormalized";
    case ErrorCode::not_a_two_run: return "NotATwoRun";
    case ErrorCode::bad_moment_bound: return "BadMomentBound";
    case ErrorCode::unsupported_kind: return "UnsupportedKind";
    case ErrorCode::not_integer_valued: return "NotIntegerValued";
    case ErrorCode::non_positive_theta: return "NonPositiveTheta";
    case ErrorCode::unsupported_bound_form: return "UnsupportedBoundForm";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::schema_error: return "SchemaError";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message starts with the
/// error name (e.g. "NonzeroDiagonal: ...") so CLI output is greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace steinlab
