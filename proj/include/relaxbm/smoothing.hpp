// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "relaxbm/numeric.hpp"
#include "relaxbm/rbm.hpp"

namespace relaxbm {

enum class Family { kExponential, kUniformExp, kPowerFunction, kGaussian, kShiftedGaussian };

/// Smoothing transformation r(ζ|z) for a binary z.
///
///   Exponential    r(ζ|0) = e^{−βζ}/Z_β, r(ζ|1) = e^{β(ζ−1)}/Z_β on [0,1],
///                  Z_β = (1 − e^{−β})/β
///   UniformExp     (1−ε)·Exponential + ε on [0,1]
///   PowerFunction  Beta(1/β, 1) for z=0 and Beta(1, 1/β) for z=1, β > 1
///   Gaussian       N(ζ | z, 1/β) on ℝ
///   ShiftedGaussian N(ζ | z + shift, 1/β) on ℝ (posterior side only)
struct SmoothingKind {
  Family family = Family::kPowerFunction;
  double beta = 30.0;
  double epsilon = 0.05;
  double shift = 0.0;

  static SmoothingKind exponential(double beta) { return {Family::kExponential, beta}; }
  static SmoothingKind uniform_exp(double beta, double epsilon = 0.05) {
    return {Family::kUniformExp, beta, epsilon};
  }
  static SmoothingKind power(double beta) { return {Family::kPowerFunction, beta}; }
  static SmoothingKind gaussian(double beta) { return {Family::kGaussian, beta}; }
  static SmoothingKind shifted_gaussian(double beta, double shift) {
    return {Family::kShiftedGaussian, beta, 0.05, shift};
  }

  /// Throws DomainError for β ≤ 0, β ≤ 1 (power) or ε outside (0,1).
  void validate() const;
  /// Support is [0,1] (otherwise ℝ).
  bool bounded() const { return family != Family::kGaussian && family != Family::kShiftedGaussian; }
  /// r(ζ|0) = r(1−ζ|1) for every ζ.
  bool symmetric() const { return family != Family::kShiftedGaussian || shift == 0.0; }
};

std::string_view family_name(Family family);
/// Accepts the CLI names exp, unexp, power, gauss and git (shifted Gaussian).
Family parse_family(std::string_view name);

/// Endpoint guard for power-function densities in log-weights.
inline constexpr double kDensityClamp = 1e-7;

struct ComponentEval {
  double pdf;
  double cdf;
  double log_pdf;
};

/// Exact normalized density and CDF of r(ζ|z); ζ is clamped into [0,1] for
/// bounded families. The power-function density is infinite at its endpoint.
ComponentEval evaluate(const SmoothingKind& kind, int z, double zeta);
double component_cdf(const SmoothingKind& kind, int z, double zeta);
double component_pdf(const SmoothingKind& kind, int z, double zeta);
/// ∂R(ζ|z)/∂β in closed form.
double component_dcdf_dbeta(const SmoothingKind& kind, int z, double zeta);

/// ζ moved to where densities are evaluated inside log-weights: into
/// [kDensityClamp, 1 − kDensityClamp] for the power function, into [0,1] for
/// the other bounded families, unchanged on ℝ.
double density_point(const SmoothingKind& kind, double zeta);
/// log r(ζ|z) at density_point(ζ).
double clamped_log_pdf(const SmoothingKind& kind, int z, double zeta);
/// ∂/∂ζ of clamped_log_pdf; zero where the clamp is active.
double clamped_dlog_pdf_dzeta(const SmoothingKind& kind, int z, double zeta);
/// ∂/∂β of clamped_log_pdf.
double clamped_dlog_pdf_dbeta(const SmoothingKind& kind, int z, double zeta);

/// b_i = log r(ζ_i|1) − log r(ζ_i|0), c_i = log r(ζ_i|0), at the density point.
AugmentedCoefficients coefficients(const SmoothingKind& kind, const Vector& zeta);
/// Elementwise ∂b/∂ζ and ∂c/∂ζ.
AugmentedCoefficients coefficient_slopes(const SmoothingKind& kind, const Vector& zeta);

struct MixtureEval {
  double pdf;
  double cdf;
};

/// (1−q) r(ζ|0) + q r(ζ|1) and its CDF, exact.
MixtureEval mixture_evaluate(const SmoothingKind& kind, double q, double zeta);
double mixture_cdf(const SmoothingKind& kind, double q, double zeta);

/// Log-density of the mixture with weight σ(logit), evaluated at the density
/// point, with the partial derivatives the posterior needs.
struct MixtureLogDensity {
  double log_pdf;
  double resp1;        // posterior weight of the z=1 component
  double d_zeta;       // ∂ log pdf / ∂ζ
  double d_logit;      // ∂ log pdf / ∂logit = resp1 − q
  double d_beta;       // ∂ log pdf / ∂β
};
MixtureLogDensity mixture_log_density(const SmoothingKind& kind, double logit, double zeta);

/// Throws DomainError when a bounded family gets ζ outside [0,1] or ζ is not finite.
void check_in_support(const SmoothingKind& kind, const Vector& zeta);

/// Interval that holds every root of the mixture CDF equation.
std::pair<double, double> sampling_bracket(const SmoothingKind& kind);

}  // namespace relaxbm
