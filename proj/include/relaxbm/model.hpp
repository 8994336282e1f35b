// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relaxbm/network.hpp"
#include "relaxbm/rbm.hpp"
#include "relaxbm/relaxation.hpp"
#include "relaxbm/smoothing.hpp"

namespace relaxbm {

/// Overlapping relaxation with a mean-field prior, or the Gaussian integral
/// trick (selected by the shifted Gaussian smoothing).
enum class PriorKind { kOverlapping, kGaussianIntegral };

struct ModelConfig {
  std::size_t data_dim = 0;
  std::size_t latent_first = 8;   // D1, one side of the RBM
  std::size_t latent_second = 8;  // D2
  std::size_t groups = 2;
  Arch arch = Arch::kLinear;
  std::size_t hidden = 200;
  /// Prior and posterior smoothing. For kShiftedGaussian, beta is the prior's
  /// β and the initial per-unit posterior β.
  SmoothingKind smoothing = SmoothingKind::power(30.0);
  int mf_iterations = 5;

  std::size_t latent_dim() const { return latent_first + latent_second; }
  std::size_t group_size() const { return latent_dim() / groups; }
  PriorKind prior_kind() const {
    return smoothing.family == Family::kShiftedGaussian ? PriorKind::kGaussianIntegral : PriorKind::kOverlapping;
  }
  void validate() const;
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// All trainable parameters in one flat vector:
///   prior.a, prior.W (D1×D2 cross block, column-major), posterior.g<g>,
///   posterior.log_beta (Gaussian integral trick only), decoder.
class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(std::string_view name) const;
  bool has_block(std::string_view name) const;

  /// Network weights uniform ±1/√fan_in with zero biases; RBM a = 0 and W
  /// uniform ±0.01; log β at the configured value.
  void init(Rng& rng);

  Rbm prior() const;
  const DenseNet& posterior_net(std::size_t group) const { return posterior_nets_.at(group); }
  const DenseNet& decoder_net() const { return decoder_; }
  /// Smoothing of unit i given its network shift output.
  SmoothingKind posterior_kind(std::size_t unit, double shift) const;

 private:
  ModelConfig config_;
  std::vector<DenseNet> posterior_nets_;
  DenseNet decoder_;
  std::vector<ParamBlock> blocks_;
  Vector params_;
};

struct PosteriorSample {
  Vector zeta;
  double log_q = 0.0;
  Vector logits;  // of q(z_i = 1 | x, ζ_<g)
  Vector shifts;  // shifted Gaussian only, zero otherwise
};

/// Hierarchical sample of q(ζ|x) from per-unit noise ρ ∈ (0,1)^D.
PosteriorSample posterior_sample_from_noise(const Model& model, const Vector& x, const Vector& rho);
PosteriorSample posterior_sample(const Model& model, const Vector& x, Rng& rng);

/// Σ_j x_j log σ(l_j) + (1 − x_j) log σ(−l_j) with l the decoder output at ζ.
double decoder_log_likelihood(const Model& model, const Vector& zeta, const Vector& x);

/// Unnormalized prior log density of ζ (excludes −log Z).
double prior_log_prob(const Model& model, const Vector& zeta);

struct IwBound {
  double bound = 0.0;
  std::vector<double> log_w;
};

/// K-sample importance-weighted bound, unnormalized: −log Z is not included.
/// `warmup` multiplies the prior and −log q terms.
IwBound iw_bound(const Model& model, const Vector& x, std::size_t k, Rng& rng, double warmup = 1.0);

/// Same bound with the noise supplied (k × D, one row per sample).
IwBound iw_bound_from_noise(const Model& model, const Vector& x, const Matrix& noise, double warmup = 1.0);

struct ObjectiveResult {
  double value = 0.0;  // batch mean of the unnormalized bounds
  Vector grad;         // ascent direction, including the negative phase
  std::vector<double> mf_kl;  // exact mean-field KL of the first datum's samples, when requested
  std::size_t saturated = 0;  // implicit gradients that hit the density guard
};

/// Batch-mean bound and its gradient for frozen noise (one k × D matrix per
/// row of `batch`). The prior gradient uses the supplied negative phase.
ObjectiveResult objective_and_gradient(const Model& model, const Matrix& batch, const std::vector<Matrix>& noise,
                                       const NegativePhase& negative, double warmup, bool record_mf_kl = false);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  std::uint64_t step = 0;
};

AdamState make_adam_state(std::size_t n);

/// Ascent step on `params`.
void adam_update(Vector& params, const Vector& grad, AdamState& state, const AdamConfig& config);

struct StepMetrics {
  double bound = 0.0;
  double grad_norm = 0.0;
  double mf_kl_median = 0.0;  // NaN when not recorded
  bool skipped = false;       // non-finite gradient or an invalid resulting prior
  std::string skip_reason;
};

/// One optimizer update on the minibatch (rows). Noise is drawn from `rng`.
StepMetrics iw_gradient_step(Model& model, AdamState& adam, const AdamConfig& adam_config, const Matrix& batch,
                             std::size_t k, const NegativePhase& negative, double warmup, Rng& rng,
                             bool record_mf_kl = false);

/// Discrete evaluation: z drawn from the hierarchical Bernoulli posterior (ζ
/// replaced by the binary z), log w = −E(z) − log Z + log p(x|z) − log q(z|x).
IwBound discrete_eval_ll(const Model& model, const Vector& x, std::size_t k, double log_z, Rng& rng);

/// log Σ_z p(z) p(x|z) by enumeration (D ≤ 20).
double exact_discrete_log_likelihood(const Model& model, const Vector& x, double log_z);

}  // namespace relaxbm
