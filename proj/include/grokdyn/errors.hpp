#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grokdyn {

// Numeric values are shared with the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimension = 2,
  kDivergence = 3,
  kRankDeficient = 4,
  kNumerical = 5,
  kInsufficientHistory = 6,
  kIo = 7,
  kCheckFailed = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorCode::kDimension, what) {}
};

/// Raised when an iterate or gradient stops being finite. Carries the step
/// index at which it was detected.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : Error(ErrorCode::kDivergence, what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

/// HH^T (or another Gram matrix) is too ill-conditioned to invert.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(double condition_estimate, const std::string& what)
      : Error(ErrorCode::kRankDeficient, what), condition_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCode::kNumerical, what) {}
};

class InsufficientHistory : public Error {
 public:
  explicit InsufficientHistory(const std::string& what)
      : Error(ErrorCode::kInsufficientHistory, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

/// A verification run finished but its measured error is above threshold.
class CheckFailed : public Error {
 public:
  explicit CheckFailed(const std::string& what) : Error(ErrorCode::kCheckFailed, what) {}
};

}  // namespace grokdyn
