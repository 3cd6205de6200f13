#pragma once

#include <stdexcept>
#include <string>

namespace pansr {

/// Input violates a documented precondition (bad shape, bad parameter, bad file content).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while running an otherwise valid request (I/O, numeric divergence).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

/// Non-finite value produced inside a network; carries the offending layer.
class NumericError : public RuntimeFailure {
 public:
  NumericError(const std::string& what, int layer)
      : RuntimeFailure(what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace pansr
