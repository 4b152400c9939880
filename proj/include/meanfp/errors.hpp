#pragma once

#include <stdexcept>
#include <string>

namespace meanfp {

/// Experiment configuration is malformed or violates the schema.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A map failed its nonexpansiveness / commutativity / contraction
/// certificate.
class CertificationError : public std::runtime_error {
 public:
  explicit CertificationError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Operation is not available for the given objects (fixed-set oracle on
/// composed generators, metric projection for p != 2, ...).
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The described common fixed-point set is empty.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace meanfp
