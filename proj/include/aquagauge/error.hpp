#pragma once

#include <stdexcept>
#include <string>

namespace aquagauge {

// Every recoverable error the library raises is a KindedError: a runtime_error
// tagged with a per-module enum so callers and tests can branch on the cause
// without parsing messages.
template <typename Kind>
class KindedError : public std::runtime_error {
 public:
  KindedError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Raised when an internal consistency check fails. Never expected for valid
// inputs; the CLI maps it to exit code 3.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Selects between the OpenMP kernels and their serial reference versions.
// Both produce bit-identical results.
enum class Execution { serial, parallel };

}  // namespace aquagauge
