// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "relaxbm/smoothing.hpp"

namespace relaxbm {

/// Noise is kept inside [kRhoClamp, 1 − kRhoClamp].
inline constexpr double kRhoClamp = 1e-12;

/// Solves (1−q) R(ζ|0) + q R(ζ|1) = ρ for ζ.
///
/// Bounded families search in the logit of ζ (of 1 − ζ for roots above ½, by
/// symmetry) so roots near either endpoint keep their relative precision; Gaussian families search ζ on sampling_bracket().
/// Safeguarded Newton with bisection fallback runs until the step or the
/// bracket is below round-off. The residual is at most 1e-12 unless the exact
/// root is not representable, in which case the CDF values at the neighbouring
/// doubles straddle ρ.
double sample_inverse_cdf(const SmoothingKind& kind, double q, double rho);

struct ImplicitGrads {
  double dzeta_dq = 0.0;
  double dzeta_dbeta = 0.0;
  /// The mixture density overflowed or underflowed at ζ; gradients were capped.
  bool saturated = false;
};

/// Implicit-function gradients of the root ζ(q, β):
///   ∂ζ/∂q = (R(ζ|0) − R(ζ|1)) / pdf(ζ)
///   ∂ζ/∂β = −((1−q) ∂_βR(ζ|0) + q ∂_βR(ζ|1)) / pdf(ζ)
/// with the exact (unclamped) mixture density. For the shifted Gaussian,
/// ∂ζ/∂shift = 1.
ImplicitGrads implicit_grads(const SmoothingKind& kind, double q, double zeta);

}  // namespace relaxbm
