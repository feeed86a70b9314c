#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kschemo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid polygon or nonconforming mesh.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Size mismatch between a field, an operator and/or a mesh.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite data handed to a numerical routine.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A kinetic or coefficient function produced or received a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Diffusion coefficient dropped below its floor: the model left its validity region.
class CoefficientError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration. Carries the offending key and its line (0 if not from a file).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what)
      : Error((line ? "line " + std::to_string(line) + ": " : std::string()) + "'" + key +
              "': " + what),
        key_(std::move(key)),
        line_(line) {}
  const std::string& key() const { return key_; }
  std::size_t line() const { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

}  // namespace kschemo
