#pragma once

#include <stdexcept>
#include <string>

namespace mner {

// Malformed input text: analysis strings, corpus lines, embedding rows.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or matrix dimensions do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition was violated by the caller.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite loss or gradient encountered while training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model or checkpoint file could not be read.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mner
