#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfmbem {

// Every failure raised by the library derives from Error so callers can catch
// the family or a single kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
  using Error::Error;
};
class RangeError : public Error {
  using Error::Error;
};
class ConfigError : public Error {
  using Error::Error;
};
class SingularityError : public Error {
  using Error::Error;
};
class ResonanceError : public Error {
  using Error::Error;
};
class ConditioningError : public Error {
  using Error::Error;
};
class ShapeError : public Error {
  using Error::Error;
};
class StateError : public Error {
  using Error::Error;
};

/// GMRES ran out of iterations; carries the best iterate and its relative residual.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, std::vector<std::complex<double>> best, double residual)
      : Error(what), best_(std::move(best)), residual_(residual) {}
  const std::vector<std::complex<double>>& best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<std::complex<double>> best_;
  double residual_;
};

class ParseError : public Error {
 public:
  ParseError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace pfmbem
