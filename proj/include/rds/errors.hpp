#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rds {

/// Thrown when an iterate or intermediate value stops being finite.
/// Carries the iteration index where the failure was detected.
class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& what, long iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Thrown by the conjugate-gradient step size when the curvature
/// denominator vanishes for a nonzero direction.
class degenerate_direction_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown by binary readers on bad magic, truncation, or malformed
/// payloads. Carries the byte offset of the first offending byte.
class format_error : public std::runtime_error {
 public:
  format_error(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Thrown when a configuration file fails validation. Names the field.
class validation_error : public std::runtime_error {
 public:
  validation_error(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Thrown when an operation is requested on a model kind that does not
/// support it (e.g. an analytic-only query on an external model).
class unsupported_operation : public std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace rds
