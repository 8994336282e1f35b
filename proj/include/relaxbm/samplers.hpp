// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "relaxbm/rbm.hpp"

namespace relaxbm {

enum class SamplerKind { kPcd, kPopulationAnnealing };

std::string_view sampler_name(SamplerKind kind);
SamplerKind parse_sampler(std::string_view name);

/// Negative-phase sampler settings. For PCD `chains` persistent chains each
/// advance `sweeps_per_update` sweeps per call. For population annealing
/// `chains` is the population size; the run visits `pa_temperatures` linearly
/// spaced inverse temperatures with max(1, sweeps_per_update / pa_temperatures)
/// sweeps at each.
struct SamplerConfig {
  SamplerKind kind = SamplerKind::kPopulationAnnealing;
  std::size_t chains = 1000;
  std::size_t sweeps_per_update = 40;
  std::size_t pa_temperatures = 40;

  void validate() const;
};

/// Persistent chain states for PCD; one row per chain.
struct PersistentChains {
  Matrix states;
};

/// Draws `chains` independent states from ∏ σ(a_i), the usual PCD start.
PersistentChains init_persistent_chains(const Rbm& rbm, std::size_t chains, Rng& rng);

/// Advances each persistent chain by sweeps_per_update block-Gibbs sweeps and
/// returns a copy of the new states.
Matrix pcd_negative_samples(const Rbm& rbm, PersistentChains& chains, const SamplerConfig& config, Rng& rng);

struct PopulationAnnealingResult {
  Matrix samples;               // final population, equally weighted
  double log_z = 0.0;           // free-energy estimate of log Z
  std::size_t resamplings = 0;  // number of resampling events
  double min_ess = 0.0;         // smallest effective sample size seen
  bool collapsed = false;       // effective sample size fell below 2
};

/// Anneals a population from the factorial base (couplings scaled by 0) to the
/// target, reweighting by the Boltzmann-factor ratio at each temperature and
/// resampling systematically whenever the effective sample size drops below
/// half the population. The returned population is resampled to equal weights.
PopulationAnnealingResult population_annealing_run(const Rbm& rbm, const SamplerConfig& config, Rng& rng);

/// Systematic resampling: indices drawn with one uniform offset.
std::vector<std::size_t> systematic_resample(std::span<const double> log_weights, Rng& rng);

/// Effective sample size (Σw)² / Σw² from log-weights.
double effective_sample_size(std::span<const double> log_weights);

struct AisConfig {
  std::size_t num_temperatures = 10000;
  std::size_t num_samples = 1000;
  /// Inverse-temperature grid; empty means linear with num_temperatures points.
  std::vector<double> schedule;
  std::size_t bootstrap_rounds = 200;

  void validate() const;
  std::vector<double> resolved_schedule() const;
};

struct AisResult {
  double log_z = 0.0;
  double std_error = 0.0;
  std::vector<double> log_weights;
};

/// Annealed importance sampling from ∏ σ(a_i) to the target along couplings
/// scaled by the schedule. std_error is a bootstrap estimate over samples.
AisResult ais_log_partition(const Rbm& rbm, const AisConfig& config, Rng& rng);

/// Σ_i log(1 + e^{a_i}), the exact log partition of the factorial base.
double factorial_log_partition(const Vector& biases);

}  // namespace relaxbm
