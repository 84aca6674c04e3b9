#pragma once

#include <stdexcept>
#include <string>

namespace cgx {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Experiment config problem; the message starts with the field path.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// A CSV cell that could not be parsed, or a non-finite value.
class IngestionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedTaskError : public Error {
 public:
  using Error::Error;
};

// Feature width or matrix dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Malformed rule-set text or JSON. The message carries the location.
class ParseError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class SubstitutionError : public Error {
 public:
  using Error::Error;
};

class IterationLimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgx
