#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

/// Argument outside the mathematical domain of an operation (x ∉ [0,1], γ < 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data that is well-typed but inconsistent (counts, statistics, configs).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A root or bracket that was requested does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal numerical consistency check failed (e.g. Born probabilities outside [0,1]).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File could not be read or written; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probe states do not span the operator space; carries the dimension of the
/// missing subspace.
class IncompleteProbeSetError : public std::runtime_error {
 public:
  explicit IncompleteProbeSetError(int null_space_dim)
      : std::runtime_error("incomplete probe set: Gram null-space dimension " +
                           std::to_string(null_space_dim)),
        null_space_dim_(null_space_dim) {}

  int null_space_dim() const noexcept { return null_space_dim_; }

 private:
  int null_space_dim_;
};

}  // namespace biphoton
