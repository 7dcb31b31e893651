#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace anglesizer {

enum class ErrorCode {
  InvalidValue,
  InvalidProfile,
  InvalidConfig,
  InvalidObservation,
  EmptyTrace,
  NonMonotonicTime,
  MalformedFrame,
  IoFailure,
  OffScreen,
  BadParams,
  InsufficientHistory,
  InvalidGoal,
  IllegalTransition,
  GestureMismatch,
  LengthMismatch,
  EmptyGroup,
  InvalidTask,
  InvalidBaseline,
  DegenerateVariance,
  DegenerateX,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library. Parse errors carry the 1-based
/// line number of the offending record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace anglesizer
