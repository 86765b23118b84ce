#pragma once

#include <stdexcept>
#include <string>

namespace netcbc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A configuration file or override could not be turned into valid specs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No candidate in the synthesis search produced a verified (P, F) pair.
class ExhaustedSearch : public Error {
 public:
  using Error::Error;
};

/// The unsafe level set does not lie above the initial level set.
class BetaNotAboveEta : public Error {
 public:
  BetaNotAboveEta(double eta, double beta)
      : Error("beta (" + std::to_string(beta) + ") is not above eta (" + std::to_string(eta) + ")"),
        eta_(eta),
        beta_(beta) {}

  double eta() const noexcept { return eta_; }
  double beta() const noexcept { return beta_; }

 private:
  double eta_;
  double beta_;
};

}  // namespace netcbc
