// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/reparam.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

constexpr double kBracketWidth = 1e-13;
constexpr double kStepTolerance = 1e-15;
constexpr int kMaxIterations = 400;
// Logit range whose sigmoid spans every positive double below one.
constexpr double kLogitLow = -746.0;
constexpr double kLogitHigh = 37.0;

double mixture_pdf_exact(const SmoothingKind& kind, double q, double zeta) {
  return (1.0 - q) * component_pdf(kind, 0, zeta) + q * component_pdf(kind, 1, zeta);
}

// Safeguarded Newton on a monotone map `to_zeta` from a search coordinate to ζ:
// a Newton step is taken when it stays inside the bracket and shrinks fast
// enough, otherwise the bracket is bisected.
template <typename ToZeta, typename Jacobian>
double solve(const SmoothingKind& kind, double q, double rho, double lo, double hi, double start, ToZeta to_zeta,
             Jacobian jacobian) {
  auto residual = [&](double t) { return mixture_cdf(kind, q, to_zeta(t)) - rho; };
  if (residual(lo) >= 0.0) return to_zeta(lo);
  if (residual(hi) <= 0.0) return to_zeta(hi);
  double t = std::clamp(start, lo, hi);
  double step_old = hi - lo;
  for (int i = 0; i < kMaxIterations; ++i) {
    const double r = residual(t);
    if (r == 0.0) break;
    if (r < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo <= kBracketWidth) {
      t = 0.5 * (lo + hi);
      break;
    }
    const double slope = mixture_pdf_exact(kind, q, to_zeta(t)) * jacobian(t);
    const double newton = t - r / slope;
    double next;
    if (slope > 0.0 && std::isfinite(newton) && newton > lo && newton < hi &&
        std::abs(2.0 * r) <= std::abs(step_old * slope)) {
      step_old = std::abs(newton - t);
      next = newton;
      if (step_old <= kStepTolerance * std::max(1.0, std::abs(t))) {
        t = next;
        break;
      }
    } else {
      next = 0.5 * (lo + hi);
      step_old = hi - lo;
      if (next <= lo || next >= hi) break;
    }
    t = next;
  }
  return to_zeta(t);
}

}  // namespace

double sample_inverse_cdf(const SmoothingKind& kind, double q, double rho) {
  kind.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("mixture weight q must lie in [0,1]");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("noise rho must lie in (0,1)");
  rho = std::clamp(rho, kRhoClamp, 1.0 - kRhoClamp);

  if (kind.bounded()) {
    // σ(t) skips doubles just below 1, so roots in the upper half are found as
    // 1 − ζ' where ζ' solves the mirrored equation R(ζ'|·) with q → 1−q, ρ → 1−ρ.
    const bool upper = kind.symmetric() && mixture_cdf(kind, q, 0.5) < rho;
    const double qs = upper ? 1.0 - q : q;
    const double rs = upper ? 1.0 - rho : rho;
    const double zeta = solve(
        kind, qs, rs, kLogitLow, kLogitHigh, std::log(rs) - std::log1p(-rs), [](double t) { return sigmoid(t); },
        [](double t) {
          const double s = sigmoid(t);
          return s * (1.0 - s);
        });
    return upper ? 1.0 - zeta : zeta;
  }
  const auto [lo, hi] = sampling_bracket(kind);
  const double start = kind.family == Family::kShiftedGaussian ? 0.5 + kind.shift : 0.5;
  return solve(
      kind, q, rho, lo, hi, start, [](double x) { return x; }, [](double) { return 1.0; });
}

ImplicitGrads implicit_grads(const SmoothingKind& kind, double q, double zeta) {
  kind.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("mixture weight q must lie in [0,1]");
  const double r0 = component_cdf(kind, 0, zeta);
  const double r1 = component_cdf(kind, 1, zeta);
  const double num_q = r0 - r1;
  const double num_beta =
      -((1.0 - q) * component_dcdf_dbeta(kind, 0, zeta) + q * component_dcdf_dbeta(kind, 1, zeta));
  double pdf = mixture_pdf_exact(kind, q, zeta);

  ImplicitGrads out;
  if (std::isinf(pdf)) {
    // Root sits on a density singularity: the sample does not move.
    out.saturated = true;
    return out;
  }
  if (!(pdf >= DBL_MIN)) {
    out.saturated = true;
    pdf = DBL_MIN;
  }
  out.dzeta_dq = num_q / pdf;
  out.dzeta_dbeta = num_beta / pdf;
  if (!std::isfinite(out.dzeta_dq) || !std::isfinite(out.dzeta_dbeta)) {
    out.saturated = true;
    out.dzeta_dq = std::clamp(out.dzeta_dq, -DBL_MAX, DBL_MAX);
    out.dzeta_dbeta = std::clamp(out.dzeta_dbeta, -DBL_MAX, DBL_MAX);
  }
  return out;
}

}  // namespace relaxbm
