// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/relaxation.hpp"

#include <cmath>
#include <numbers>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

void check_coeffs(const Rbm& rbm, const AugmentedCoefficients& coeffs) {
  const auto d = static_cast<Eigen::Index>(rbm.dim());
  if (coeffs.b.size() != d || coeffs.c.size() != d) throw DimensionError("coefficient size does not match the machine");
}

void sweep(const Rbm& rbm, const Vector& shifted_bias, Vector& logits, Vector& m) {
  const Matrix& W = rbm.couplings();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    logits[i] = shifted_bias[i] + W.row(i).dot(m);
    m[i] = sigmoid(logits[i]);
  }
}

double entropy_from_logits(const Vector& logits) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) h += bernoulli_entropy_from_logit(logits[i]);
  return h;
}

double target_log_normalizer(const Rbm& rbm, const AugmentedCoefficients& coeffs) {
  return exact_log_partition(rbm, coeffs.b) + coeffs.c.sum();
}

}  // namespace

double factorial_entropy(const Vector& m) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double p = m[i];
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  }
  return h;
}

double mean_field_kl_exact(const Rbm& rbm, const AugmentedCoefficients& coeffs, const Vector& m) {
  check_coeffs(rbm, coeffs);
  if (rbm.dim() > 20) throw TooLargeError("exact mean-field KL needs D <= 20");
  return augmented_energy(rbm, coeffs, m) + target_log_normalizer(rbm, coeffs) - factorial_entropy(m);
}

MeanFieldSolution mean_field_fit(const Rbm& rbm, const AugmentedCoefficients& coeffs, int iterations,
                                 bool exact_kl) {
  check_coeffs(rbm, coeffs);
  if (iterations < 0) throw DomainError("mean-field iterations must be non-negative");
  const Vector shifted = rbm.biases() + coeffs.b;
  MeanFieldSolution out;
  out.logits = shifted;
  out.m = shifted.unaryExpr([](double x) { return sigmoid(x); });
  for (int it = 0; it < iterations; ++it) sweep(rbm, shifted, out.logits, out.m);
  out.entropy = entropy_from_logits(out.logits);
  out.unnormalized_log_prob = out.entropy - augmented_energy(rbm, coeffs, out.m);
  if (exact_kl) out.kl_to_target = target_log_normalizer(rbm, coeffs) - out.unnormalized_log_prob;
  return out;
}

std::vector<double> mean_field_kl_trace(const Rbm& rbm, const AugmentedCoefficients& coeffs, int iterations) {
  check_coeffs(rbm, coeffs);
  if (iterations < 0) throw DomainError("mean-field iterations must be non-negative");
  const double log_norm = target_log_normalizer(rbm, coeffs);
  const Vector shifted = rbm.biases() + coeffs.b;
  Vector logits = shifted;
  Vector m = shifted.unaryExpr([](double x) { return sigmoid(x); });
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(iterations) + 1);
  auto kl = [&] { return augmented_energy(rbm, coeffs, m) + log_norm - entropy_from_logits(logits); };
  trace.push_back(kl());
  for (int it = 0; it < iterations; ++it) {
    sweep(rbm, shifted, logits, m);
    trace.push_back(kl());
  }
  return trace;
}

RelaxedLogProb relaxed_log_prob(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta, int mf_iterations) {
  if (static_cast<std::size_t>(zeta.size()) != rbm.dim()) throw DimensionError("zeta size does not match the machine");
  check_in_support(kind, zeta);
  RelaxedLogProb out;
  out.mean_field = mean_field_fit(rbm, coefficients(kind, zeta), mf_iterations);
  out.value = out.mean_field.unnormalized_log_prob;
  return out;
}

NegativePhase negative_phase(const Matrix& samples) {
  if (samples.rows() == 0) throw DomainError("negative phase needs at least one sample");
  const double n = static_cast<double>(samples.rows());
  return {samples.colwise().sum().transpose() / n, samples.transpose() * samples / n};
}

NegativePhase negative_phase(const Moments& exact) { return {exact.mean, exact.second}; }

PriorGradients relaxed_positive_grads(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta,
                                      const MeanFieldSolution& mf) {
  const auto d = static_cast<Eigen::Index>(rbm.dim());
  if (zeta.size() != d || mf.m.size() != d) throw DimensionError("zeta or mean-field size does not match the machine");
  const AugmentedCoefficients slopes = coefficient_slopes(kind, zeta);
  PriorGradients g;
  g.grad_a = mf.m;
  g.grad_W = (mf.m * mf.m.transpose()).cwiseProduct(rbm.coupling_mask());
  g.grad_zeta = slopes.b.cwiseProduct(mf.m) + slopes.c;
  return g;
}

PriorGradients relaxed_log_prob_grads(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta,
                                      const MeanFieldSolution& mf, const NegativePhase& negative) {
  const auto d = static_cast<Eigen::Index>(rbm.dim());
  if (negative.mean.size() != d || negative.second.rows() != d || negative.second.cols() != d)
    throw DimensionError("negative phase size does not match the machine");
  PriorGradients g = relaxed_positive_grads(rbm, kind, zeta, mf);
  g.grad_a -= negative.mean;
  g.grad_W -= negative.second.cwiseProduct(rbm.coupling_mask());
  return g;
}

PriorGradients relaxed_log_prob_grads(const Rbm& rbm, const SmoothingKind& kind, const Vector& zeta,
                                      const MeanFieldSolution& mf, const Matrix& negative_samples) {
  if (negative_samples.cols() != static_cast<Eigen::Index>(rbm.dim()))
    throw DimensionError("negative samples have the wrong width");
  return relaxed_log_prob_grads(rbm, kind, zeta, mf, negative_phase(negative_samples));
}

double smallest_eigenvalue_estimate(const Matrix& W, int iterations) {
  const Eigen::Index d = W.rows();
  if (d == 0) return 0.0;
  const double rho = W.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix shifted = rho * Matrix::Identity(d, d) - W;
  Vector v = Vector::Constant(d, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) v[i] += 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = shifted * v;
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
    mu = v.dot(shifted * v);
  }
  return rho - mu;
}

GitPrior git_prepare(const Rbm& rbm, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
  const auto d = static_cast<Eigen::Index>(rbm.dim());
  GitPrior out;
  out.beta = beta;
  out.precision = rbm.couplings() + beta * Matrix::Identity(d, d);
  out.cholesky.compute(out.precision);
  if (out.cholesky.info() != Eigen::Success) {
    throw NotPositiveDefinite(beta, -smallest_eigenvalue_estimate(rbm.couplings()));
  }
  const Matrix& L = out.cholesky.matrixLLT();
  double half_log_det = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(L(i, i) > 0.0)) throw NotPositiveDefinite(beta, -smallest_eigenvalue_estimate(rbm.couplings()));
    half_log_det += std::log(L(i, i));
  }
  out.log_det_term = half_log_det - 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  return out;
}

double git_log_prob(const GitPrior& prior, const Rbm& rbm, const Vector& zeta) {
  if (zeta.size() != prior.precision.rows()) throw DimensionError("zeta size does not match the machine");
  if (!zeta.allFinite()) throw DomainError("zeta must be finite");
  const Vector p_zeta = prior.precision * zeta;
  double value = prior.log_det_term - 0.5 * zeta.dot(p_zeta);
  for (Eigen::Index i = 0; i < zeta.size(); ++i) value += softplus(rbm.biases()[i] + p_zeta[i] - 0.5 * prior.beta);
  return value;
}

PriorGradients git_positive_grads(const GitPrior& prior, const Rbm& rbm, const Vector& zeta) {
  if (zeta.size() != prior.precision.rows()) throw DimensionError("zeta size does not match the machine");
  const Vector p_zeta = prior.precision * zeta;
  Vector s(zeta.size());
  for (Eigen::Index i = 0; i < zeta.size(); ++i) s[i] = sigmoid(rbm.biases()[i] + p_zeta[i] - 0.5 * prior.beta);
  PriorGradients g;
  g.grad_a = s;
  g.grad_zeta = prior.precision * (s - zeta);
  const Matrix inv = prior.cholesky.solve(Matrix::Identity(zeta.size(), zeta.size()));
  const Matrix sz = s * zeta.transpose();
  g.grad_W = (inv - zeta * zeta.transpose() + sz + sz.transpose()).cwiseProduct(rbm.coupling_mask());
  return g;
}

}  // namespace relaxbm
