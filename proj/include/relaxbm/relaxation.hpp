// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "relaxbm/rbm.hpp"
#include "relaxbm/smoothing.hpp"

namespace relaxbm {

// ---------------------------------------------------------------------------
// Mean-field overlapping relaxation
// ---------------------------------------------------------------------------

/// Factorial approximation m(z) = ∏ m_i^{z_i}(1−m_i)^{1−z_i} of the augmented
/// machine p̂(z) ∝ exp(−Ê(z)).
struct MeanFieldSolution {
  Vector m;        // m_i = σ(logits_i)
  Vector logits;   // a_i + b_i + Σ_j W_ij m_j at the last update
  double entropy = 0.0;
  /// H(m) − Ê(m); approximates log Σ_z exp(−Ê(z)).
  double unnormalized_log_prob = 0.0;
  /// Exact KL(m ‖ p̂), only when requested (D ≤ 20).
  std::optional<double> kl_to_target;
};

/// Runs `iterations` sequential sweeps m_i ← σ(a_i + b_i + Σ_j W_ij m_j) in
/// ascending unit order, starting from m_i = σ(a_i + b_i).
MeanFieldSolution mean_field_fit(const Rbm& rbm, const AugmentedCoefficients& coeffs, int iterations,
                                 bool exact_kl = false);

/// Exact KL(m ‖ p̂) after 0, 1, ..., iterations sweeps (size iterations + 1).
std::vector<double> mean_field_kl_trace(const Rbm& rbm, const AugmentedCoefficients& coeffs, int iterations);

/// Ê(m) + log Σ_z exp(−Ê(z)) − H(m), exact by enumeration.
double mean_field_kl_exact(const Rbm& rbm, const AugmentedCoefficients& coeffs, const Vector& m);

/// H(m) for a factorial distribution; 0·log 0 is taken as 0.
double factorial_entropy(const Vector& m);

struct RelaxedLogProb {
  double value = 0.0;  // H(m) − Ê(m); excludes −log Z
  MeanFieldSolution mean_field;
};

/// Mean-field estimate of log Σ_z exp(−E(z)) r(ζ|z), i.e. log p(ζ) + log Z.
RelaxedLogProb relaxed_log_prob(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta, int mf_iterations);

/// Negative-phase statistics of a batch of binary samples (one per row).
struct NegativePhase {
  Vector mean;    // E[z_i]
  Matrix second;  // E[z_i z_j]
};
NegativePhase negative_phase(const Matrix& samples);
NegativePhase negative_phase(const Moments& exact);

/// Gradients of log p(ζ). grad_W holds the derivative with respect to the
/// tied coupling W_ij = W_ji (zero on masked entries), so it is symmetric.
struct PriorGradients {
  Vector grad_a;
  Matrix grad_W;
  Vector grad_zeta;
};

/// −∇Ê(m) + E_p[∇E(z)] with m held fixed; the expectation is the sample mean
/// over `negative_samples` (rows).
PriorGradients relaxed_log_prob_grads(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta,
                                      const MeanFieldSolution& mf, const Matrix& negative_samples);
PriorGradients relaxed_log_prob_grads(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta,
                                      const MeanFieldSolution& mf, const NegativePhase& negative);

/// Positive-phase part only: the gradient of H(m) − Ê(m) at fixed m.
PriorGradients relaxed_positive_grads(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta,
                                      const MeanFieldSolution& mf);

// ---------------------------------------------------------------------------
// Gaussian integral trick
// ---------------------------------------------------------------------------

/// Prepared Gaussian-integral relaxation with r(ζ|z) = N(ζ | z, (W + βI)^{-1}).
struct GitPrior {
  double beta = 0.0;
  Matrix precision;               // W + βI
  Eigen::LLT<Matrix> cholesky;    // of the precision
  double log_det_term = 0.0;      // ½ log|precision / 2π|
};

/// Factorizes W + βI. Throws NotPositiveDefinite with a power-iteration lower
/// bound on the β that is required.
GitPrior git_prepare(const Rbm& rbm, double beta);

/// log p(ζ) + log Z = ½ log|P/2π| − ½ ζᵀPζ + Σ_i softplus(a_i + (Pζ)_i − β/2).
double git_log_prob(const GitPrior& prior, const Rbm& rbm, const Vector& zeta);

/// Positive-phase gradients of git_log_prob (tied W convention as above).
PriorGradients git_positive_grads(const GitPrior& prior, const Rbm& rbm, const Vector& zeta);

/// Smallest eigenvalue estimate of W by power iteration on (ρI − W).
double smallest_eigenvalue_estimate(const Matrix& W, int iterations = 500);

}  // namespace relaxbm
