#pragma once

#include <stdexcept>
#include <string>

namespace surflow {

/// Error categories double as CLI exit codes.
enum class ErrorCategory { config = 1, data = 2, numerics = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

#define SURFLOW_DEFINE_ERROR(Name, Category)                                     \
  class Name : public Error {                                                    \
   public:                                                                       \
    explicit Name(const std::string& what) : Error(ErrorCategory::Category, what) {} \
  };

SURFLOW_DEFINE_ERROR(InvalidConfig, config)
SURFLOW_DEFINE_ERROR(InvalidSpec, config)
SURFLOW_DEFINE_ERROR(GridTooSmall, config)
SURFLOW_DEFINE_ERROR(InconsistentPeriodicity, config)
SURFLOW_DEFINE_ERROR(FormatError, data)
SURFLOW_DEFINE_ERROR(ShapeMismatch, data)
SURFLOW_DEFINE_ERROR(DegenerateMetric, data)
SURFLOW_DEFINE_ERROR(BoundaryViolation, data)
SURFLOW_DEFINE_ERROR(CFLExceeded, numerics)

#undef SURFLOW_DEFINE_ERROR

}  // namespace surflow
