#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

/// Base of all library errors. Messages are meant to be shown verbatim.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Atomic data file does not match the documented schema.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error("parse error (line " + std::to_string(line) + "): " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Parsed data violates a physical sanity anchor or an invariant.
class DataIntegrityError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Wavelength lies inside the pole-exclusion window of a transition.
class ResonanceError : public Error {
public:
  ResonanceError(const std::string &what, std::string line)
      : Error(what), line_(std::move(line)) {}
  const std::string &line() const { return line_; }

private:
  std::string line_;
};

class NoRootError : public Error {
public:
  using Error::Error;
};

class AmbiguousBracketError : public Error {
public:
  using Error::Error;
};

/// Requested solver is outside its validity regime.
class SolverSelectionError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  NumericalError(const std::string &what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// Fock-space truncation too small for the requested drive.
class CutoffError : public Error {
public:
  CutoffError(const std::string &what, double top_population)
      : Error(what), top_population_(top_population) {}
  double top_population() const { return top_population_; }

private:
  double top_population_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class FitError : public Error {
public:
  explicit FitError(const std::string &what, std::vector<double> residuals = {})
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double> &residuals() const { return residuals_; }

private:
  std::vector<double> residuals_;
};

class CalibrationError : public Error {
public:
  using Error::Error;
};

} // namespace cqed
