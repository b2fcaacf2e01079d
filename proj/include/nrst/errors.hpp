#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nrst {

/// Precondition violations on caller-supplied values.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The potential returned NaN, -inf, or +inf for a model whose likelihood has
/// full support. Carries the offending point.
class DivergedPotential : public std::runtime_error {
 public:
  DivergedPotential(std::vector<double> x, double value);

  const std::vector<double>& point() const noexcept { return x_; }
  double value() const noexcept { return value_; }

 private:
  std::vector<double> x_;
  double value_;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by regenerative estimators when no tour reached the target level.
class NoTopVisits : public std::runtime_error {
 public:
  NoTopVisits() : std::runtime_error("no tour visited the top level") {}
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownModel : public InvalidArgument {
 public:
  UnknownModel(const std::string& name, const std::vector<std::string>& available);
};

}  // namespace nrst
