// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

std::vector<Rng> member_streams(Rng& rng, std::size_t n) {
  const std::uint64_t base = rng.next();
  std::vector<Rng> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.emplace_back(base, Stream::kMember, k);
  return out;
}

Matrix factorial_rows(const Vector& biases, std::span<Rng> rngs) {
  Matrix states(static_cast<Eigen::Index>(rngs.size()), biases.size());
  for (std::size_t k = 0; k < rngs.size(); ++k) states.row(static_cast<Eigen::Index>(k)) = sample_factorial(biases, rngs[k]).transpose();
  return states;
}

// ½ zᵀWz for every row.
Vector pair_terms(const Rbm& rbm, const Matrix& states) {
  const auto& p = *rbm.partition();
  const auto f = static_cast<Eigen::Index>(p.first);
  const auto s = static_cast<Eigen::Index>(p.second);
  const Matrix proj = states.leftCols(f) * rbm.couplings().block(0, f, f, s);
  return proj.cwiseProduct(states.rightCols(s)).rowwise().sum();
}

void require_bipartite(const Rbm& rbm) {
  if (!rbm.is_bipartite()) throw DomainError("sampler needs a bipartite machine");
}

}  // namespace

std::string_view sampler_name(SamplerKind kind) { return kind == SamplerKind::kPcd ? "pcd" : "pa"; }

SamplerKind parse_sampler(std::string_view name) {
  if (name == "pcd") return SamplerKind::kPcd;
  if (name == "pa") return SamplerKind::kPopulationAnnealing;
  throw DomainError("unknown sampler '" + std::string(name) + "' (expected pa or pcd)");
}

void SamplerConfig::validate() const {
  if (chains == 0) throw DomainError("sampler needs at least one chain");
  if (sweeps_per_update == 0) throw DomainError("sweeps per update must be >= 1");
  if (kind == SamplerKind::kPopulationAnnealing) {
    if (chains < 2) throw DomainError("population annealing needs a population of at least 2");
    if (pa_temperatures == 0) throw DomainError("population annealing needs at least one temperature");
  }
}

PersistentChains init_persistent_chains(const Rbm& rbm, std::size_t chains, Rng& rng) {
  auto rngs = member_streams(rng, chains);
  return {factorial_rows(rbm.biases(), rngs)};
}

Matrix pcd_negative_samples(const Rbm& rbm, PersistentChains& chains, const SamplerConfig& config, Rng& rng) {
  require_bipartite(rbm);
  config.validate();
  if (static_cast<std::size_t>(chains.states.cols()) != rbm.dim()) {
    throw DimensionError("persistent chain width does not match the machine");
  }
  auto rngs = member_streams(rng, static_cast<std::size_t>(chains.states.rows()));
  for (std::size_t s = 0; s < config.sweeps_per_update; ++s) block_gibbs_sweep_rows(rbm, chains.states, rngs);
  return chains.states;
}

double effective_sample_size(std::span<const double> log_weights) {
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  double s1 = 0.0;
  double s2 = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - m);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

std::vector<std::size_t> systematic_resample(std::span<const double> log_weights, Rng& rng) {
  const std::size_t n = log_weights.size();
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::exp(log_weights[i] - m);
    cumulative[i] = total;
  }
  std::vector<std::size_t> out(n);
  const double step = total / static_cast<double>(n);
  double u = rng.uniform() * step;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (j + 1 < n && cumulative[j] <= u) ++j;
    out[i] = j;
    u += step;
  }
  return out;
}

double factorial_log_partition(const Vector& biases) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < biases.size(); ++i) s += softplus(biases[i]);
  return s;
}

PopulationAnnealingResult population_annealing_run(const Rbm& rbm, const SamplerConfig& config, Rng& rng) {
  require_bipartite(rbm);
  config.validate();
  const std::size_t n = config.chains;
  const std::size_t temps = config.pa_temperatures;
  const std::size_t sweeps_each = std::max<std::size_t>(1, config.sweeps_per_update / temps);

  auto rngs = member_streams(rng, n);
  Rng resample_rng(rng.next(), Stream::kResample);
  Matrix states = factorial_rows(rbm.biases(), rngs);

  PopulationAnnealingResult out;
  out.log_z = factorial_log_partition(rbm.biases());
  out.min_ess = static_cast<double>(n);
  std::vector<double> log_w(n, 0.0);

  auto resample = [&] {
    const auto idx = systematic_resample(log_w, resample_rng);
    Matrix next(states.rows(), states.cols());
    for (std::size_t k = 0; k < n; ++k) next.row(static_cast<Eigen::Index>(k)) = states.row(static_cast<Eigen::Index>(idx[k]));
    states.swap(next);
    std::fill(log_w.begin(), log_w.end(), 0.0);
    ++out.resamplings;
  };

  for (std::size_t t = 1; t <= temps; ++t) {
    const double beta_prev = static_cast<double>(t - 1) / static_cast<double>(temps);
    const double beta = static_cast<double>(t) / static_cast<double>(temps);
    const Vector pair = pair_terms(rbm, states);
    const double before = log_sum_exp(log_w);
    for (std::size_t k = 0; k < n; ++k) log_w[k] += (beta - beta_prev) * pair[static_cast<Eigen::Index>(k)];
    out.log_z += log_sum_exp(log_w) - before;

    const double ess = effective_sample_size(log_w);
    out.min_ess = std::min(out.min_ess, ess);
    if (ess < 2.0) out.collapsed = true;
    if (ess < 0.5 * static_cast<double>(n)) resample();
    for (std::size_t s = 0; s < sweeps_each; ++s) block_gibbs_sweep_rows(rbm, states, rngs, beta);
  }
  if (std::any_of(log_w.begin(), log_w.end(), [&](double v) { return v != log_w.front(); })) resample();
  out.samples = std::move(states);
  return out;
}

void AisConfig::validate() const {
  if (num_samples == 0) throw DomainError("AIS needs at least one sample");
  const auto grid = resolved_schedule();
  if (grid.size() < 2) throw DomainError("AIS needs at least two temperatures");
  if (grid.front() != 0.0 || grid.back() != 1.0) throw DomainError("AIS schedule must start at 0 and end at 1");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("AIS schedule must be strictly increasing");
  }
}

std::vector<double> AisConfig::resolved_schedule() const {
  if (!schedule.empty()) return schedule;
  std::vector<double> grid(num_temperatures);
  for (std::size_t t = 0; t < num_temperatures; ++t) {
    grid[t] = static_cast<double>(t) / static_cast<double>(num_temperatures - 1);
  }
  if (!grid.empty()) grid.back() = 1.0;
  return grid;
}

AisResult ais_log_partition(const Rbm& rbm, const AisConfig& config, Rng& rng) {
  require_bipartite(rbm);
  config.validate();
  const auto grid = config.resolved_schedule();
  const std::size_t n = config.num_samples;
  auto rngs = member_streams(rng, n);
  Rng boot_rng(rng.next(), Stream::kBootstrap);
  Matrix states = factorial_rows(rbm.biases(), rngs);

  std::vector<double> log_w(n, 0.0);
  for (std::size_t t = 1; t < grid.size(); ++t) {
    const Vector pair = pair_terms(rbm, states);
    const double step = grid[t] - grid[t - 1];
    for (std::size_t k = 0; k < n; ++k) log_w[k] += step * pair[static_cast<Eigen::Index>(k)];
    if (t + 1 < grid.size()) block_gibbs_sweep_rows(rbm, states, rngs, grid[t]);
  }

  const double base = factorial_log_partition(rbm.biases());
  AisResult out;
  out.log_z = base + log_mean_exp(log_w);

  std::vector<double> draw(n);
  double mean = 0.0;
  double sq = 0.0;
  const std::size_t rounds = std::max<std::size_t>(config.bootstrap_rounds, 2);
  std::vector<double> estimates(rounds);
  for (std::size_t b = 0; b < rounds; ++b) {
    for (std::size_t k = 0; k < n; ++k) draw[k] = log_w[boot_rng.below(n)];
    estimates[b] = log_mean_exp(draw);
    mean += estimates[b];
  }
  mean /= static_cast<double>(rounds);
  for (double e : estimates) sq += (e - mean) * (e - mean);
  out.std_error = std::sqrt(sq / static_cast<double>(rounds - 1));
  out.log_weights = std::move(log_w);
  return out;
}

}  // namespace relaxbm
