#pragma once

#include <stdexcept>
#include <string>

namespace clumpq {

// Raised when a structural assumption of the analytic method fails at
// runtime (root counts off, roots hugging the unit circle, degenerate or
// ill-conditioned linear systems). Distinct from std::invalid_argument,
// which covers plain bad inputs.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clumpq
