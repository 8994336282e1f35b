// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

namespace relaxbm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double log_sigmoid(double x) { return -softplus(-x); }

double log_sum_exp(std::span<const double> values);
double log_mean_exp(std::span<const double> values);
double log_sum_exp(double x, double y);

/// Streaming log-sum-exp accumulator; add() in any order.
class LogSumExp {
 public:
  void add(double x) {
    if (x == -INFINITY) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const { return max_ == -INFINITY ? -INFINITY : max_ + std::log(sum_); }

 private:
  double max_ = -INFINITY;
  double sum_ = 0.0;
};

/// Entropy of a Bernoulli variable with the given logit, finite for every logit.
inline double bernoulli_entropy_from_logit(double logit) {
  const double p = sigmoid(logit);
  return p * softplus(-logit) + (1.0 - p) * softplus(logit);
}

inline bool all_finite(const Eigen::Ref<const Vector>& v) { return v.allFinite(); }

}  // namespace relaxbm
