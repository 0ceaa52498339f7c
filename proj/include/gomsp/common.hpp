#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gomsp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  InvalidInput,
  Domain,
  Numerical,
  Infeasible,
  Config,
  EmptyRecord,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base of every exception thrown by the library. The kind selects the CLI
/// exit status (config/io/input -> 1, numerical/domain/infeasible -> 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Iterative routine gave up; carries its iteration count and the best
/// iterate it had when it stopped.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iterations = 0, Vector best = {})
      : Error(ErrorKind::Numerical, what), iterations_(iterations), best_(std::move(best)) {}
  long iterations() const noexcept { return iterations_; }
  const Vector& best_iterate() const noexcept { return best_; }

 private:
  long iterations_;
  Vector best_;
};

class InfeasibleSlotError : public Error {
 public:
  explicit InfeasibleSlotError(const std::string& what) : Error(ErrorKind::Infeasible, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class EmptyRecordError : public Error {
 public:
  explicit EmptyRecordError(const std::string& what) : Error(ErrorKind::EmptyRecord, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

/// Emits a warning line on stderr unless warnings were silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace gomsp
