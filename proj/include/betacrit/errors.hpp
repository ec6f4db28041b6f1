#pragma once

#include <stdexcept>
#include <string>

namespace betacrit {

/// Input violates a declared invariant (bad problem, potential, or config).
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not deliver a trustworthy answer
/// (non-convergence, indeterminate classification, unstable count).
class NumericalError : public std::runtime_error {
public:
  NumericalError(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// The zero-energy kernel does not exist (recurrent case).
class DivergentLimitError : public DomainError {
public:
  DivergentLimitError()
      : DomainError("limit kernel divergent: the Neumann problem in d <= 2 "
                    "has no zero-energy Green function") {}
};

} // namespace betacrit
