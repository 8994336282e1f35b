// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "relaxbm/rbm.hpp"
#include "relaxbm/smoothing.hpp"
#include "relaxbm/train.hpp"

namespace relaxbm {

// ---------------------------------------------------------------------------
// Gradient variance of the relaxed sample with respect to q
// ---------------------------------------------------------------------------

struct GradVarianceRow {
  Family family = Family::kExponential;
  double beta = 0.0;
  double mean_abs_dist = 0.0;  // mean |ζ − 1[ζ > 0.5]|
  double grad_variance = 0.0;  // Var[∂ζ/∂q]
  double grad_mean = 0.0;
  double zeta_mean = 0.0;
  std::size_t saturated = 0;
};

/// Exponential β ∈ {8, …, 15} followed by power β ∈ {10, 20, …, 80}.
std::vector<SmoothingKind> default_gradvar_grid();

/// n_samples draws of ζ at fixed q per kind; the noise for kind j comes from
/// Rng(seed, kDiag, j). Requires n_samples ≥ 10⁴.
std::vector<GradVarianceRow> grad_variance_experiment(const std::vector<SmoothingKind>& kinds, double q,
                                                      std::size_t n_samples, std::uint64_t seed);

/// Variance of the curve `b` interpolated (piecewise-linear in mean_abs_dist)
/// at distance `dist`; extrapolates linearly from the nearest segment when
/// `dist` lies outside the curve's range.
double variance_at_distance(const std::vector<GradVarianceRow>& curve, double dist);

// ---------------------------------------------------------------------------
// Mean-field KL traces
// ---------------------------------------------------------------------------

struct MfKlRow {
  double beta = 0.0;
  std::size_t zeta_index = 0;
  int sweep = 0;  // 0 is the initialization
  double kl = 0.0;
};

/// Exact samples (rows) of a bipartite machine drawn through the marginal of
/// its first side, which must have at most 20 units.
Matrix exact_bipartite_samples(const Rbm& rbm, std::size_t n, Rng& rng);

/// For each ζ draw: z from the exact prior, then ζ_i ~ r(·|z_i) with the same
/// noise for every β. Emits the exact KL after each sweep.
std::vector<MfKlRow> mf_kl_trace(const Rbm& rbm, Family family, const std::vector<double>& betas,
                                 std::size_t n_zeta, int sweeps, std::uint64_t seed);

/// Random D1×D2 machine with a ~ N(0, bias_scale²) and W ~ N(0, weight_scale²).
Rbm diag_rbm(std::size_t first, std::size_t second, double bias_scale, double weight_scale, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Inverse CDF curves
// ---------------------------------------------------------------------------

struct InvCdfRow {
  double beta = 0.0;
  double rho = 0.0;
  double zeta = 0.0;
  double dzeta_dq = 0.0;
};

/// ζ(ρ) and ∂ζ/∂q(ρ) on an evenly spaced interior grid of n_points values.
std::vector<InvCdfRow> inverse_cdf_curves(Family family, const std::vector<double>& betas, double q,
                                          std::size_t n_points);

// ---------------------------------------------------------------------------
// Evaluation and the PA/PCD comparison
// ---------------------------------------------------------------------------

struct EvalResult {
  double eval_ll = 0.0;    // mean discrete bound over the evaluated rows
  double std_error = 0.0;  // across rows
  double log_z = 0.0;
  double log_z_std_error = 0.0;
  std::size_t rows = 0;
};

/// AIS for log Z with `ais`, then discrete_eval_ll with k samples per row.
EvalResult evaluate_model(const Model& model, const Matrix& data, std::size_t k, const AisConfig& ais,
                          std::uint64_t seed);
/// Same with a known log Z (standard error 0).
EvalResult evaluate_model(const Model& model, const Matrix& data, std::size_t k, double log_z, std::uint64_t seed);

struct PaVsPcdRow {
  SamplerKind sampler = SamplerKind::kPopulationAnnealing;
  std::size_t k = 1;
  double eval_ll = 0.0;
  double std_error = 0.0;
  double log_z = 0.0;
  double log_z_std_error = 0.0;
  double final_bound = 0.0;
};

/// Trains one model per (sampler, K) that differ only in the negative-phase
/// sampler and the training K, then evaluates each on the test split with
/// eval_k discrete samples.
std::vector<PaVsPcdRow> pa_vs_pcd_report(const TrainConfig& base, const Dataset& data,
                                         const std::vector<std::size_t>& ks, std::size_t eval_k);

// CSV rendering.
std::string gradvar_csv(const std::vector<GradVarianceRow>& rows);
std::string mfkl_csv(const std::vector<MfKlRow>& rows);
std::string invcdf_csv(const std::vector<InvCdfRow>& rows);
std::string pa_vs_pcd_csv(const std::vector<PaVsPcdRow>& rows);

}  // namespace relaxbm
