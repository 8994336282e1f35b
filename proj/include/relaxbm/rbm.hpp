// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>

#include "relaxbm/container.hpp"
#include "relaxbm/numeric.hpp"
#include "relaxbm/rng.hpp"

namespace relaxbm {

struct SmoothingKind;

/// Two-sided split of the units: side one is [0, first), side two is [first, first + second).
struct Bipartition {
  std::size_t first = 0;
  std::size_t second = 0;
  bool operator==(const Bipartition&) const = default;
};

/// Boltzmann machine p(z) ∝ exp(aᵀz + ½ zᵀWz) over z ∈ {0,1}^D.
///
/// W is stored densely, symmetric with a zero diagonal. When a bipartition is
/// set, couplings between units on the same side are zero.
class Rbm {
 public:
  Rbm(Vector biases, Matrix couplings, std::optional<Bipartition> partition = std::nullopt);

  /// Builds a bipartite machine from the D1×D2 cross-coupling block.
  static Rbm bipartite(const Vector& biases, const Matrix& cross);

  std::size_t dim() const { return static_cast<std::size_t>(biases_.size()); }
  const Vector& biases() const { return biases_; }
  const Matrix& couplings() const { return couplings_; }
  const std::optional<Bipartition>& partition() const { return partition_; }
  bool is_bipartite() const { return partition_.has_value(); }

  /// 1 where W_ij is a free parameter, 0 elsewhere (diagonal, same-side pairs).
  Matrix coupling_mask() const;

  void set_biases(Vector biases);
  void set_couplings(Matrix couplings);

 private:
  void validate() const;

  Vector biases_;
  Matrix couplings_;
  std::optional<Bipartition> partition_;
};

/// Per-unit shift b(ζ) and constant c(ζ) of the augmented energy.
struct AugmentedCoefficients {
  Vector b;
  Vector c;
};

/// Factorial Bernoulli moments of a Boltzmann machine.
struct Moments {
  Vector mean;   // E[z_i]
  Matrix second; // E[z_i z_j]
};

/// E(z) = −aᵀz − ½ zᵀWz for a binary z.
double energy(const Rbm& rbm, const Vector& z);

/// Multilinear extension E(m) − bᵀm − Σ c_i for m ∈ [0,1]^D.
double augmented_energy(const Rbm& rbm, const AugmentedCoefficients& coeffs, const Vector& m);

/// log Σ_z exp((a + shift)ᵀz + ½ zᵀWz) by enumeration. Bipartite machines
/// enumerate the smaller side and sum the other side analytically.
double exact_log_partition(const Rbm& rbm, const Vector& bias_shift);
double exact_log_partition(const Rbm& rbm);

/// Largest model that exact_log_partition accepts (per enumerated side).
inline constexpr std::size_t kMaxEnumerationDim = 24;

/// log p(ζ) = log Σ_z p(z) r(ζ|z), normalized, by enumeration.
double exact_relaxed_log_prob(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta);

/// Exact first and second moments by enumeration.
Moments exact_moments(const Rbm& rbm);

/// One block-Gibbs sweep: side one given side two, then side two given side one.
Vector block_gibbs_sweep(const Rbm& rbm, const Vector& state, Rng& rng);

/// In-place sweep of every row of `states` at coupling scale `scale`
/// (conditionals σ(a_i + scale·Σ_j W_ij z_j)). Row k draws from rngs[k].
void block_gibbs_sweep_rows(const Rbm& rbm, Matrix& states, std::span<Rng> rngs, double scale = 1.0);

/// Exact sample from the factorial distribution ∏ σ(a_i).
Vector sample_factorial(const Vector& biases, Rng& rng);

/// Random bipartite machine with a ~ N(0, bias_scale²), cross couplings ~ N(0, weight_scale²).
Rbm random_bipartite_rbm(std::size_t first, std::size_t second, double bias_scale, double weight_scale,
                         Rng& rng);

void save_rbm(KvContainer& out, const Rbm& rbm, const std::string& prefix = "");
Rbm load_rbm(const KvContainer& in, const std::string& prefix = "");

}  // namespace relaxbm
