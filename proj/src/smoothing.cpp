// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// log Z_β for the exponential pair: log((1 − e^{−β}) / β).
double exp_log_norm(double beta) { return std::log(-std::expm1(-beta)) - std::log(beta); }

// ∂/∂β log Z_β = 1/(e^β − 1) − 1/β.
double exp_dlog_norm(double beta) { return 1.0 / std::expm1(beta) - 1.0 / beta; }

double exp_log_pdf(double beta, int z, double zeta) {
  return (z == 0 ? -beta * zeta : beta * (zeta - 1.0)) - exp_log_norm(beta);
}

double exp_cdf(double beta, int z, double zeta) {
  const double denom = -std::expm1(-beta);
  if (z == 0) return -std::expm1(-beta * zeta) / denom;
  return std::exp(beta * (zeta - 1.0)) * -std::expm1(-beta * zeta) / denom;
}

double exp_dcdf0_dbeta(double beta, double zeta) {
  const double num = -std::expm1(-beta * zeta);
  const double den = -std::expm1(-beta);
  const double dnum = zeta * std::exp(-beta * zeta);
  const double dden = std::exp(-beta);
  return (dnum * den - num * dden) / (den * den);
}

double gaussian_mean(const SmoothingKind& kind, int z) {
  return static_cast<double>(z) + (kind.family == Family::kShiftedGaussian ? kind.shift : 0.0);
}

void check_z(int z) {
  if (z != 0 && z != 1) throw DomainError("binary state must be 0 or 1");
}

// Exact log-density and its partials at a point already moved into the support.
double raw_log_pdf(const SmoothingKind& k, int z, double zeta) {
  switch (k.family) {
    case Family::kExponential:
      return exp_log_pdf(k.beta, z, zeta);
    case Family::kUniformExp:
      return std::log(k.epsilon + (1.0 - k.epsilon) * std::exp(exp_log_pdf(k.beta, z, zeta)));
    case Family::kPowerFunction: {
      const double x = z == 0 ? zeta : 1.0 - zeta;
      return -std::log(k.beta) + (1.0 / k.beta - 1.0) * std::log(x);
    }
    case Family::kGaussian:
    case Family::kShiftedGaussian: {
      const double d = zeta - gaussian_mean(k, z);
      return 0.5 * (std::log(k.beta) - kLogTwoPi) - 0.5 * k.beta * d * d;
    }
  }
  return NAN;
}

double raw_dlog_pdf_dzeta(const SmoothingKind& k, int z, double zeta) {
  switch (k.family) {
    case Family::kExponential:
      return z == 0 ? -k.beta : k.beta;
    case Family::kUniformExp: {
      const double r = std::exp(exp_log_pdf(k.beta, z, zeta));
      const double mixed = k.epsilon + (1.0 - k.epsilon) * r;
      return (1.0 - k.epsilon) * r * (z == 0 ? -k.beta : k.beta) / mixed;
    }
    case Family::kPowerFunction:
      return z == 0 ? (1.0 / k.beta - 1.0) / zeta : -(1.0 / k.beta - 1.0) / (1.0 - zeta);
    case Family::kGaussian:
    case Family::kShiftedGaussian:
      return -k.beta * (zeta - gaussian_mean(k, z));
  }
  return NAN;
}

double raw_dlog_pdf_dbeta(const SmoothingKind& k, int z, double zeta) {
  switch (k.family) {
    case Family::kExponential:
      return (z == 0 ? -zeta : zeta - 1.0) - exp_dlog_norm(k.beta);
    case Family::kUniformExp: {
      const double r = std::exp(exp_log_pdf(k.beta, z, zeta));
      const double mixed = k.epsilon + (1.0 - k.epsilon) * r;
      const double dlog = (z == 0 ? -zeta : zeta - 1.0) - exp_dlog_norm(k.beta);
      return (1.0 - k.epsilon) * r * dlog / mixed;
    }
    case Family::kPowerFunction: {
      const double x = z == 0 ? zeta : 1.0 - zeta;
      return -1.0 / k.beta - std::log(x) / (k.beta * k.beta);
    }
    case Family::kGaussian:
    case Family::kShiftedGaussian: {
      const double d = zeta - gaussian_mean(k, z);
      return 0.5 / k.beta - 0.5 * d * d;
    }
  }
  return NAN;
}

double to_support(const SmoothingKind& kind, double zeta) {
  return kind.bounded() ? std::clamp(zeta, 0.0, 1.0) : zeta;
}

bool clamp_active(const SmoothingKind& kind, double zeta) { return density_point(kind, zeta) != zeta; }

}  // namespace

void SmoothingKind::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive, got " + std::to_string(beta));
  if (family == Family::kPowerFunction && !(beta > 1.0)) {
    throw DomainError("power-function smoothing needs beta > 1, got " + std::to_string(beta));
  }
  if (family == Family::kUniformExp && !(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("uniform+exp epsilon must lie in (0,1)");
  }
  if (!std::isfinite(shift)) throw DomainError("shift must be finite");
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kExponential:
      return "exp";
    case Family::kUniformExp:
      return "unexp";
    case Family::kPowerFunction:
      return "power";
    case Family::kGaussian:
      return "gauss";
    case Family::kShiftedGaussian:
      return "git";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "exp") return Family::kExponential;
  if (name == "unexp") return Family::kUniformExp;
  if (name == "power") return Family::kPowerFunction;
  if (name == "gauss") return Family::kGaussian;
  if (name == "git") return Family::kShiftedGaussian;
  throw DomainError("unknown smoothing '" + std::string(name) + "' (expected exp, unexp, power, gauss or git)");
}

double component_cdf(const SmoothingKind& k, int z, double zeta) {
  check_z(z);
  const double x = to_support(k, zeta);
  switch (k.family) {
    case Family::kExponential:
      return exp_cdf(k.beta, z, x);
    case Family::kUniformExp:
      return (1.0 - k.epsilon) * exp_cdf(k.beta, z, x) + k.epsilon * x;
    case Family::kPowerFunction:
      if (z == 0) return x <= 0.0 ? 0.0 : std::exp(std::log(x) / k.beta);
      return x >= 1.0 ? 1.0 : -std::expm1(std::log1p(-x) / k.beta);
    case Family::kGaussian:
    case Family::kShiftedGaussian:
      return 0.5 * std::erfc(-(x - gaussian_mean(k, z)) * std::sqrt(k.beta) / M_SQRT2);
  }
  return NAN;
}

double component_pdf(const SmoothingKind& k, int z, double zeta) {
  check_z(z);
  return std::exp(raw_log_pdf(k, z, to_support(k, zeta)));
}

ComponentEval evaluate(const SmoothingKind& kind, int z, double zeta) {
  kind.validate();
  check_z(z);
  const double x = to_support(kind, zeta);
  const double log_pdf = raw_log_pdf(kind, z, x);
  return {std::exp(log_pdf), component_cdf(kind, z, x), log_pdf};
}

double component_dcdf_dbeta(const SmoothingKind& k, int z, double zeta) {
  check_z(z);
  const double x = to_support(k, zeta);
  switch (k.family) {
    case Family::kExponential:
      return z == 0 ? exp_dcdf0_dbeta(k.beta, x) : -exp_dcdf0_dbeta(k.beta, 1.0 - x);
    case Family::kUniformExp:
      return (1.0 - k.epsilon) * (z == 0 ? exp_dcdf0_dbeta(k.beta, x) : -exp_dcdf0_dbeta(k.beta, 1.0 - x));
    case Family::kPowerFunction: {
      // R0 = x^{1/β}, R1 = 1 − (1−x)^{1/β}; u^{1/β} log u → 0 as u → 0.
      const double u = z == 0 ? x : 1.0 - x;
      if (u <= 0.0) return 0.0;
      const double lu = std::log(u);
      const double d = -lu / (k.beta * k.beta) * std::exp(lu / k.beta);
      return z == 0 ? d : -d;
    }
    case Family::kGaussian:
    case Family::kShiftedGaussian: {
      const double d = x - gaussian_mean(k, z);
      const double sb = std::sqrt(k.beta);
      const double phi = std::exp(-0.5 * k.beta * d * d) / std::sqrt(2.0 * M_PI);
      return phi * d / (2.0 * sb);
    }
  }
  return NAN;
}

double density_point(const SmoothingKind& kind, double zeta) {
  if (kind.family == Family::kPowerFunction) return std::clamp(zeta, kDensityClamp, 1.0 - kDensityClamp);
  return to_support(kind, zeta);
}

double clamped_log_pdf(const SmoothingKind& kind, int z, double zeta) {
  check_z(z);
  return raw_log_pdf(kind, z, density_point(kind, zeta));
}

double clamped_dlog_pdf_dzeta(const SmoothingKind& kind, int z, double zeta) {
  check_z(z);
  if (clamp_active(kind, zeta)) return 0.0;
  return raw_dlog_pdf_dzeta(kind, z, zeta);
}

double clamped_dlog_pdf_dbeta(const SmoothingKind& kind, int z, double zeta) {
  check_z(z);
  return raw_dlog_pdf_dbeta(kind, z, density_point(kind, zeta));
}

AugmentedCoefficients coefficients(const SmoothingKind& kind, const Vector& zeta) {
  kind.validate();
  AugmentedCoefficients out{Vector(zeta.size()), Vector(zeta.size())};
  for (Eigen::Index i = 0; i < zeta.size(); ++i) {
    const double x = density_point(kind, zeta[i]);
    const double l0 = raw_log_pdf(kind, 0, x);
    out.b[i] = raw_log_pdf(kind, 1, x) - l0;
    out.c[i] = l0;
  }
  return out;
}

AugmentedCoefficients coefficient_slopes(const SmoothingKind& kind, const Vector& zeta) {
  AugmentedCoefficients out{Vector(zeta.size()), Vector(zeta.size())};
  for (Eigen::Index i = 0; i < zeta.size(); ++i) {
    const double d0 = clamped_dlog_pdf_dzeta(kind, 0, zeta[i]);
    out.b[i] = clamped_dlog_pdf_dzeta(kind, 1, zeta[i]) - d0;
    out.c[i] = d0;
  }
  return out;
}

MixtureEval mixture_evaluate(const SmoothingKind& kind, double q, double zeta) {
  kind.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("mixture weight q must lie in [0,1]");
  const double x = to_support(kind, zeta);
  return {(1.0 - q) * component_pdf(kind, 0, x) + q * component_pdf(kind, 1, x),
          (1.0 - q) * component_cdf(kind, 0, x) + q * component_cdf(kind, 1, x)};
}

double mixture_cdf(const SmoothingKind& kind, double q, double zeta) {
  return (1.0 - q) * component_cdf(kind, 0, zeta) + q * component_cdf(kind, 1, zeta);
}

MixtureLogDensity mixture_log_density(const SmoothingKind& kind, double logit, double zeta) {
  const double x = density_point(kind, zeta);
  const double l0 = log_sigmoid(-logit) + raw_log_pdf(kind, 0, x);
  const double l1 = log_sigmoid(logit) + raw_log_pdf(kind, 1, x);
  const double total = log_sum_exp(l0, l1);
  const double resp1 = std::exp(l1 - total);
  const double resp0 = std::exp(l0 - total);
  MixtureLogDensity out{};
  out.log_pdf = total;
  out.resp1 = resp1;
  out.d_logit = resp1 - sigmoid(logit);
  out.d_zeta = clamp_active(kind, zeta)
                   ? 0.0
                   : resp0 * raw_dlog_pdf_dzeta(kind, 0, x) + resp1 * raw_dlog_pdf_dzeta(kind, 1, x);
  out.d_beta = resp0 * raw_dlog_pdf_dbeta(kind, 0, x) + resp1 * raw_dlog_pdf_dbeta(kind, 1, x);
  return out;
}

void check_in_support(const SmoothingKind& kind, const Vector& zeta) {
  for (Eigen::Index i = 0; i < zeta.size(); ++i) {
    if (!std::isfinite(zeta[i])) throw DomainError("zeta must be finite");
    if (kind.bounded() && (zeta[i] < 0.0 || zeta[i] > 1.0)) {
      throw DomainError("zeta " + std::to_string(zeta[i]) + " lies outside [0,1]");
    }
  }
}

std::pair<double, double> sampling_bracket(const SmoothingKind& kind) {
  if (kind.bounded()) return {0.0, 1.0};
  const double shift = kind.family == Family::kShiftedGaussian ? kind.shift : 0.0;
  const double pad = 12.0 / std::sqrt(kind.beta);
  return {std::min(0.0, shift) - pad, std::max(1.0, 1.0 + shift) + pad};
}

}  // namespace relaxbm
