// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace relaxbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not agree with the model dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (bad beta, q outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration requested for a model that is too large.
class TooLargeError : public Error {
 public:
  using Error::Error;
};

/// W + beta*I is not positive definite. required_min() is a lower bound on the
/// beta needed, estimated from the most negative eigenvalue of W.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(double beta, double required_min)
      : Error("W + beta*I is not positive definite for beta=" + std::to_string(beta) +
              "; beta must exceed " + std::to_string(required_min)),
        beta_(beta),
        required_min_(required_min) {}

  double beta() const { return beta_; }
  double required_min() const { return required_min_; }

 private:
  double beta_;
  double required_min_;
};

/// Malformed or unreadable files (checkpoints, datasets, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unsupported configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace relaxbm
