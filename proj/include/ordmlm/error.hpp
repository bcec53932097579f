#pragma once

#include <stdexcept>
#include <string>

namespace ordmlm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Hemoglobin value that cannot be mapped to an anemia level.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

/// Raw records that cannot be encoded (unknown labels, empty input).
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Model cannot be fitted (unidentifiable thresholds, non-finite start).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Inner mode search failed for a specific cluster.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int cluster)
      : Error(what), cluster_(cluster) {}
  int cluster() const noexcept { return cluster_; }

 private:
  int cluster_;
};

}  // namespace ordmlm
