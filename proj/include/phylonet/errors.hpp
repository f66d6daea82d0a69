#pragma once

#include <stdexcept>
#include <string>

namespace phylonet {

/// Base for failures of a numeric procedure (poles, exhausted retries, caps).
/// The CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapExceeded : public NumericError {
 public:
  using NumericError::NumericError;
};

class BeyondRadius : public NumericError {
 public:
  using NumericError::NumericError;
};

class DivergentTail : public NumericError {
 public:
  using NumericError::NumericError;
};

class DepthExhausted : public NumericError {
 public:
  using NumericError::NumericError;
};

class BracketFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Retry budget spent; carries the acceptance rate seen so far.
class RetryExhausted : public NumericError {
 public:
  RetryExhausted(const std::string& what, double acceptance_rate)
      : NumericError(what), acceptance_rate_(acceptance_rate) {}
  double acceptance_rate() const { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

/// Inconsistent structure, e.g. a decoration whose mutation count does not
/// match the outdegree of its vertex.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace phylonet
