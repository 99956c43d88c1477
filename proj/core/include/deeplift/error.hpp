#pragma once

#include <stdexcept>
#include <string>

namespace deeplift {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Structural problems: cycles, dangling ids, duplicate ids, unknown nodes.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Bad inputs to an evaluation: missing tensors, non-finite values.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Model or data file could not be parsed. The message carries the location.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Attribution request cannot be served (unsupported node kind, no head, ...).
class AttributionError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Training diverged or was misconfigured.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace deeplift
