// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/rng.hpp"

#include <cmath>

namespace relaxbm {

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection keeps the draw unbiased for every n.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return r % n;
}

double Rng::normal() {
  // Box-Muller; one draw per call keeps the stream position explicit.
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace relaxbm
