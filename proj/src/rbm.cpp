// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/rbm.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "relaxbm/error.hpp"
#include "relaxbm/smoothing.hpp"

namespace relaxbm {
namespace {

constexpr std::uint64_t kRefreshMask = 4095;  // recompute incremental fields every 4096 states

void check_binary(const Vector& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] != 0.0 && z[i] != 1.0) throw DomainError("state entries must be 0 or 1");
  }
}

// log Σ over the enumerated side S with the other side O summed analytically.
double bipartite_log_partition(const Vector& a, const Matrix& W, std::size_t s_begin, std::size_t s_size,
                               std::size_t o_begin, std::size_t o_size) {
  const auto S = static_cast<Eigen::Index>(s_size);
  const auto O = static_cast<Eigen::Index>(o_size);
  const Vector a_s = a.segment(static_cast<Eigen::Index>(s_begin), S);
  const Vector a_o = a.segment(static_cast<Eigen::Index>(o_begin), O);
  const Matrix w_os = W.block(static_cast<Eigen::Index>(o_begin), static_cast<Eigen::Index>(s_begin), O, S);

  Vector z = Vector::Zero(S);
  Vector field = a_o;
  double linear = 0.0;
  LogSumExp acc;
  auto term = [&] {
    double v = linear;
    for (Eigen::Index j = 0; j < O; ++j) v += softplus(field[j]);
    return v;
  };
  acc.add(term());
  const std::uint64_t n_states = std::uint64_t{1} << s_size;
  for (std::uint64_t k = 1; k < n_states; ++k) {
    const auto i = static_cast<Eigen::Index>(std::countr_zero(k));
    const double sign = z[i] == 0.0 ? 1.0 : -1.0;
    z[i] = 1.0 - z[i];
    if ((k & kRefreshMask) == 0) {
      field = a_o + w_os * z;
      linear = a_s.dot(z);
    } else {
      field += sign * w_os.col(i);
      linear += sign * a_s[i];
    }
    acc.add(term());
  }
  return acc.value();
}

template <typename Visit>
void enumerate_states(const Vector& a, const Matrix& W, Visit&& visit) {
  const auto D = a.size();
  Vector z = Vector::Zero(D);
  Vector wz = Vector::Zero(D);
  double neg_energy = 0.0;
  visit(z, neg_energy);
  const std::uint64_t n_states = std::uint64_t{1} << D;
  for (std::uint64_t k = 1; k < n_states; ++k) {
    const auto i = static_cast<Eigen::Index>(std::countr_zero(k));
    const double sign = z[i] == 0.0 ? 1.0 : -1.0;
    neg_energy += sign * (a[i] + wz[i]);
    z[i] = 1.0 - z[i];
    if ((k & kRefreshMask) == 0) {
      wz = W * z;
      neg_energy = a.dot(z) + 0.5 * z.dot(wz);
    } else {
      wz += sign * W.col(i);
    }
    visit(z, neg_energy);
  }
}

}  // namespace

Rbm::Rbm(Vector biases, Matrix couplings, std::optional<Bipartition> partition)
    : biases_(std::move(biases)), couplings_(std::move(couplings)), partition_(partition) {
  validate();
}

Rbm Rbm::bipartite(const Vector& biases, const Matrix& cross) {
  const auto f = cross.rows();
  const auto s = cross.cols();
  if (biases.size() != f + s) throw DimensionError("bias length must equal D1 + D2");
  Matrix W = Matrix::Zero(f + s, f + s);
  W.block(0, f, f, s) = cross;
  W.block(f, 0, s, f) = cross.transpose();
  return Rbm(biases, std::move(W), Bipartition{static_cast<std::size_t>(f), static_cast<std::size_t>(s)});
}

void Rbm::validate() const {
  const auto D = biases_.size();
  if (couplings_.rows() != D || couplings_.cols() != D) {
    throw DimensionError("coupling matrix must be " + std::to_string(D) + "x" + std::to_string(D));
  }
  for (Eigen::Index i = 0; i < D; ++i) {
    if (couplings_(i, i) != 0.0) throw DomainError("coupling matrix must have a zero diagonal");
    for (Eigen::Index j = i + 1; j < D; ++j) {
      if (couplings_(i, j) != couplings_(j, i)) throw DomainError("coupling matrix must be symmetric");
    }
  }
  if (partition_) {
    if (partition_->first + partition_->second != static_cast<std::size_t>(D)) {
      throw DimensionError("bipartition sizes must sum to D");
    }
    const auto f = static_cast<Eigen::Index>(partition_->first);
    const bool same_side_zero = couplings_.topLeftCorner(f, f).isZero(0.0) &&
                                couplings_.bottomRightCorner(D - f, D - f).isZero(0.0);
    if (!same_side_zero) throw DomainError("bipartite machine has same-side couplings");
  }
}

Matrix Rbm::coupling_mask() const {
  const auto D = biases_.size();
  Matrix mask = Matrix::Ones(D, D);
  mask.diagonal().setZero();
  if (partition_) {
    const auto f = static_cast<Eigen::Index>(partition_->first);
    mask.topLeftCorner(f, f).setZero();
    mask.bottomRightCorner(D - f, D - f).setZero();
  }
  return mask;
}

void Rbm::set_biases(Vector biases) {
  if (biases.size() != biases_.size()) throw DimensionError("bias length mismatch");
  biases_ = std::move(biases);
}

void Rbm::set_couplings(Matrix couplings) {
  std::swap(couplings_, couplings);
  try {
    validate();
  } catch (...) {
    std::swap(couplings_, couplings);
    throw;
  }
}

double energy(const Rbm& rbm, const Vector& z) {
  if (static_cast<std::size_t>(z.size()) != rbm.dim()) throw DimensionError("state length must equal D");
  check_binary(z);
  return -rbm.biases().dot(z) - 0.5 * z.dot(rbm.couplings() * z);
}

double augmented_energy(const Rbm& rbm, const AugmentedCoefficients& coeffs, const Vector& m) {
  const auto D = static_cast<Eigen::Index>(rbm.dim());
  if (m.size() != D || coeffs.b.size() != D || coeffs.c.size() != D) {
    throw DimensionError("augmented energy inputs must have length D");
  }
  const double e = -rbm.biases().dot(m) - 0.5 * m.dot(rbm.couplings() * m);
  return e - coeffs.b.dot(m) - coeffs.c.sum();
}

double exact_log_partition(const Rbm& rbm, const Vector& bias_shift) {
  const std::size_t D = rbm.dim();
  if (static_cast<std::size_t>(bias_shift.size()) != D) throw DimensionError("bias shift length must equal D");
  const Vector a = rbm.biases() + bias_shift;
  if (const auto& p = rbm.partition()) {
    if (std::min(p->first, p->second) > kMaxEnumerationDim) {
      throw TooLargeError("both sides exceed " + std::to_string(kMaxEnumerationDim) + " units");
    }
    if (p->first <= p->second) return bipartite_log_partition(a, rbm.couplings(), 0, p->first, p->first, p->second);
    return bipartite_log_partition(a, rbm.couplings(), p->first, p->second, 0, p->first);
  }
  if (D > kMaxEnumerationDim) {
    throw TooLargeError("exact log partition needs D <= " + std::to_string(kMaxEnumerationDim));
  }
  LogSumExp acc;
  enumerate_states(a, rbm.couplings(), [&](const Vector&, double neg_energy) { acc.add(neg_energy); });
  return acc.value();
}

double exact_log_partition(const Rbm& rbm) { return exact_log_partition(rbm, Vector::Zero(rbm.dim())); }

double exact_relaxed_log_prob(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta) {
  if (rbm.dim() > 20) throw TooLargeError("exact relaxed log probability needs D <= 20");
  if (static_cast<std::size_t>(zeta.size()) != rbm.dim()) throw DimensionError("zeta length must equal D");
  check_in_support(kind, zeta);
  const AugmentedCoefficients coeffs = coefficients(kind, zeta);
  return exact_log_partition(rbm, coeffs.b) + coeffs.c.sum() - exact_log_partition(rbm);
}

Moments exact_moments(const Rbm& rbm) {
  const std::size_t D = rbm.dim();
  if (D > 20) throw TooLargeError("exact moments need D <= 20");
  const double log_z = exact_log_partition(rbm);
  Moments out{Vector::Zero(static_cast<Eigen::Index>(D)), Matrix::Zero(static_cast<Eigen::Index>(D),
                                                                      static_cast<Eigen::Index>(D))};
  enumerate_states(rbm.biases(), rbm.couplings(), [&](const Vector& z, double neg_energy) {
    const double p = std::exp(neg_energy - log_z);
    out.mean.noalias() += p * z;
    out.second.noalias() += p * z * z.transpose();
  });
  return out;
}

Vector sample_factorial(const Vector& biases, Rng& rng) {
  Vector z(biases.size());
  for (Eigen::Index i = 0; i < biases.size(); ++i) z[i] = rng.bernoulli(sigmoid(biases[i])) ? 1.0 : 0.0;
  return z;
}

void block_gibbs_sweep_rows(const Rbm& rbm, Matrix& states, std::span<Rng> rngs, double scale) {
  if (!rbm.is_bipartite()) throw DomainError("block Gibbs sweeps need a bipartite machine");
  const auto D = static_cast<Eigen::Index>(rbm.dim());
  if (states.cols() != D) throw DimensionError("chain states must have D columns");
  if (static_cast<std::size_t>(states.rows()) != rngs.size()) throw DimensionError("one generator per chain");
  const auto f = static_cast<Eigen::Index>(rbm.partition()->first);
  const auto s = D - f;
  const auto& a = rbm.biases();
  const auto& W = rbm.couplings();
  const Eigen::Index n = states.rows();

  Matrix field1 = scale * (states.rightCols(s) * W.block(f, 0, s, f));
  for (Eigen::Index k = 0; k < n; ++k) {
    Rng& rng = rngs[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < f; ++i) states(k, i) = rng.uniform() < sigmoid(a[i] + field1(k, i)) ? 1.0 : 0.0;
  }
  Matrix field2 = scale * (states.leftCols(f) * W.block(0, f, f, s));
  for (Eigen::Index k = 0; k < n; ++k) {
    Rng& rng = rngs[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < s; ++j) {
      states(k, f + j) = rng.uniform() < sigmoid(a[f + j] + field2(k, j)) ? 1.0 : 0.0;
    }
  }
}

Vector block_gibbs_sweep(const Rbm& rbm, const Vector& state, Rng& rng) {
  if (static_cast<std::size_t>(state.size()) != rbm.dim()) throw DimensionError("state length must equal D");
  Matrix rows = state.transpose();
  block_gibbs_sweep_rows(rbm, rows, std::span<Rng>(&rng, 1));
  return rows.row(0).transpose();
}

Rbm random_bipartite_rbm(std::size_t first, std::size_t second, double bias_scale, double weight_scale,
                         Rng& rng) {
  const auto f = static_cast<Eigen::Index>(first);
  const auto s = static_cast<Eigen::Index>(second);
  Vector a(f + s);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = bias_scale * rng.normal();
  Matrix cross(f, s);
  for (Eigen::Index i = 0; i < f; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) cross(i, j) = weight_scale * rng.normal();
  }
  return Rbm::bipartite(a, cross);
}

void save_rbm(KvContainer& out, const Rbm& rbm, const std::string& prefix) {
  const auto D = static_cast<std::int64_t>(rbm.dim());
  out.put(prefix + "D", D);
  out.put(prefix + "D1", static_cast<std::int64_t>(rbm.partition() ? rbm.partition()->first : 0));
  out.put(prefix + "D2", static_cast<std::int64_t>(rbm.partition() ? rbm.partition()->second : 0));
  out.put(prefix + "a", std::span<const double>(rbm.biases().data(), rbm.dim()));
  // Row-major; W is symmetric so this equals the column-major buffer.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = rbm.couplings();
  out.put(prefix + "W", std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

Rbm load_rbm(const KvContainer& in, const std::string& prefix) {
  const auto D = in.get_int(prefix + "D");
  const auto d1 = in.get_int(prefix + "D1");
  const auto d2 = in.get_int(prefix + "D2");
  const auto& a = in.get_reals(prefix + "a");
  const auto& w = in.get_reals(prefix + "W");
  if (D < 0 || static_cast<std::int64_t>(a.size()) != D || static_cast<std::int64_t>(w.size()) != D * D) {
    throw FormatError("RBM record sizes are inconsistent");
  }
  Vector biases = Eigen::Map<const Vector>(a.data(), D);
  Matrix couplings = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      w.data(), D, D);
  std::optional<Bipartition> partition;
  if (d1 > 0 || d2 > 0) {
    if (d1 < 0 || d2 < 0 || d1 + d2 != D) throw FormatError("RBM bipartition does not sum to D");
    partition = Bipartition{static_cast<std::size_t>(d1), static_cast<std::size_t>(d2)};
  }
  return Rbm(std::move(biases), std::move(couplings), partition);
}

}  // namespace relaxbm
