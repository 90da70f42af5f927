#pragma once

#include <stdexcept>
#include <string>

namespace cbm {

/// Invalid argument or configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed model, dataset or config file. Carries the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Training data cannot be min-max normalized (zero range).
class NormalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A summary statistic has no valid input points.
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw ParameterError(msg);
}

}  // namespace detail
}  // namespace cbm
