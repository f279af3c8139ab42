#pragma once

#include <stdexcept>
#include <string>

namespace llgrid {

// Argument outside the mathematical domain of an operation (r <= 0, delta <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Structural constraint violated: bad index set, grid mismatch, partition of unity off.
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Input is well-formed but degenerate for the requested construction (empty ball, m = 0).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A theorem/lemma hypothesis failed; the message names the inequality.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace llgrid
