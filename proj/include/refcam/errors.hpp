#pragma once

#include <stdexcept>
#include <string>

namespace refcam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A hyperparameter or flag is outside its admissible range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed user input: empty expression, bad RLE, unreadable file.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but a formula is undefined for it (e.g. no context tokens).
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// The mask selector had no candidate to choose from.
class NoCandidateError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class UnknownImageError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class MalformedFrameError : public BackendError {
 public:
  using BackendError::BackendError;
};

class InvariantViolationError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The remote side answered with an error frame.
class RemoteError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace refcam
