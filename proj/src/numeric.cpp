// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/numeric.hpp"

#include <algorithm>

namespace relaxbm {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -INFINITY;
  const double m = *std::max_element(values.begin(), values.end());
  if (m == -INFINITY) return -INFINITY;
  if (m == INFINITY) return INFINITY;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double log_sum_exp(double x, double y) {
  const double m = std::max(x, y);
  if (m == -INFINITY) return -INFINITY;
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

}  // namespace relaxbm
