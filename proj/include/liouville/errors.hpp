#pragma once

#include <stdexcept>
#include <string>

namespace liouville {

enum class ErrorKind {
  Parameter,
  Data,
  MeshQuality,
  Convergence,
  Numeric,
  Resolution,
  Stiffness,
};

const char* to_string(ErrorKind kind);

/// Base error. Messages are prefixed with "module::operation: ".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), kind_(kind), where_(where) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  std::string where_;
};

class ParameterError : public Error {
 public:
  ParameterError(const std::string& where, const std::string& what)
      : Error(ErrorKind::Parameter, where, what) {}
};

class DataError : public Error {
 public:
  DataError(const std::string& where, const std::string& what)
      : Error(ErrorKind::Data, where, what) {}
};

class MeshQualityError : public Error {
 public:
  MeshQualityError(const std::string& where, const std::string& what)
      : Error(ErrorKind::MeshQuality, where, what) {}
};

class NumericError : public Error {
 public:
  NumericError(const std::string& where, const std::string& what)
      : Error(ErrorKind::Numeric, where, what) {}
};

class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& where, const std::string& what)
      : Error(ErrorKind::Resolution, where, what) {}
};

// ConvergenceError and StiffnessError carry partial results; they are
// declared next to the result types they own (variational_solver.hpp,
// ricci_flow.hpp).

}  // namespace liouville
