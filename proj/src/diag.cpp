// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/diag.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relaxbm/error.hpp"
#include "relaxbm/relaxation.hpp"
#include "relaxbm/reparam.hpp"

namespace relaxbm {
namespace {

SmoothingKind with_beta(Family family, double beta) {
  SmoothingKind k;
  k.family = family;
  k.beta = beta;
  return k;
}

}  // namespace

std::vector<SmoothingKind> default_gradvar_grid() {
  std::vector<SmoothingKind> out;
  for (int b = 8; b <= 15; ++b) out.push_back(SmoothingKind::exponential(b));
  for (int b = 10; b <= 80; b += 10) out.push_back(SmoothingKind::power(b));
  return out;
}

std::vector<GradVarianceRow> grad_variance_experiment(const std::vector<SmoothingKind>& kinds, double q,
                                                      std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 10000) throw DomainError("the gradient variance experiment needs at least 10^4 samples");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  std::vector<GradVarianceRow> rows;
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    const SmoothingKind& kind = kinds[j];
    kind.validate();
    Rng rng(seed, Stream::kDiag, j);
    GradVarianceRow row{kind.family, kind.beta, 0.0, 0.0, 0.0, 0.0, 0};
    double mean = 0.0, m2 = 0.0, dist = 0.0, zeta_sum = 0.0;
    for (std::size_t n = 0; n < n_samples; ++n) {
      const double zeta = sample_inverse_cdf(kind, q, rng.uniform_open());
      const ImplicitGrads g = implicit_grads(kind, q, zeta);
      if (g.saturated) ++row.saturated;
      dist += std::abs(zeta - (zeta > 0.5 ? 1.0 : 0.0));
      zeta_sum += zeta;
      const double delta = g.dzeta_dq - mean;
      mean += delta / static_cast<double>(n + 1);
      m2 += delta * (g.dzeta_dq - mean);
    }
    const auto n = static_cast<double>(n_samples);
    row.mean_abs_dist = dist / n;
    row.grad_mean = mean;
    row.grad_variance = m2 / (n - 1.0);
    row.zeta_mean = zeta_sum / n;
    rows.push_back(row);
  }
  return rows;
}

double variance_at_distance(const std::vector<GradVarianceRow>& curve, double dist) {
  if (curve.size() < 2) throw DomainError("interpolation needs at least two points");
  std::vector<GradVarianceRow> c = curve;
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.mean_abs_dist < b.mean_abs_dist; });
  std::size_t seg = 0;
  while (seg + 2 < c.size() && dist > c[seg + 1].mean_abs_dist) ++seg;
  const auto& p = c[seg];
  const auto& r = c[seg + 1];
  const double t = (dist - p.mean_abs_dist) / (r.mean_abs_dist - p.mean_abs_dist);
  return p.grad_variance + t * (r.grad_variance - p.grad_variance);
}

Matrix exact_bipartite_samples(const Rbm& rbm, std::size_t n, Rng& rng) {
  const auto& part = rbm.partition();
  if (!part) throw DomainError("exact sampling needs a bipartite machine");
  if (part->first > 20) throw TooLargeError("exact sampling enumerates the first side, which must have <= 20 units");
  const auto d1 = static_cast<Eigen::Index>(part->first), d2 = static_cast<Eigen::Index>(part->second);
  const Vector a1 = rbm.biases().head(d1), a2 = rbm.biases().tail(d2);
  const Matrix cross = rbm.couplings().block(0, d1, d1, d2);
  const std::uint64_t states = std::uint64_t{1} << part->first;
  std::vector<double> log_p(states);
  Vector s(d1);
  for (std::uint64_t k = 0; k < states; ++k) {
    for (Eigen::Index i = 0; i < d1; ++i) s[i] = static_cast<double>((k >> i) & 1U);
    const Vector field = a2 + cross.transpose() * s;
    double lp = a1.dot(s);
    for (Eigen::Index j = 0; j < d2; ++j) lp += softplus(field[j]);
    log_p[k] = lp;
  }
  const double log_norm = log_sum_exp(log_p);
  std::vector<double> cdf(states);
  double acc = 0.0;
  for (std::uint64_t k = 0; k < states; ++k) cdf[k] = acc += std::exp(log_p[k] - log_norm);
  Matrix out(static_cast<Eigen::Index>(n), d1 + d2);
  for (std::size_t r = 0; r < n; ++r) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::uint64_t k = std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cdf.begin()), states - 1);
    for (Eigen::Index i = 0; i < d1; ++i) s[i] = static_cast<double>((k >> i) & 1U);
    const Vector field = a2 + cross.transpose() * s;
    const auto row = static_cast<Eigen::Index>(r);
    out.row(row).head(d1) = s.transpose();
    for (Eigen::Index j = 0; j < d2; ++j) out(row, d1 + j) = rng.uniform() < sigmoid(field[j]) ? 1.0 : 0.0;
  }
  return out;
}

Rbm diag_rbm(std::size_t first, std::size_t second, double bias_scale, double weight_scale, std::uint64_t seed) {
  Rng rng(seed, Stream::kDiag, 1000);
  Vector a(static_cast<Eigen::Index>(first + second));
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = bias_scale * rng.normal();
  Matrix cross(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(second));
  for (Eigen::Index i = 0; i < cross.rows(); ++i)
    for (Eigen::Index j = 0; j < cross.cols(); ++j) cross(i, j) = weight_scale * rng.normal();
  return Rbm::bipartite(a, cross);
}

std::vector<MfKlRow> mf_kl_trace(const Rbm& rbm, Family family, const std::vector<double>& betas,
                                 std::size_t n_zeta, int sweeps, std::uint64_t seed) {
  if (rbm.dim() > 20) throw TooLargeError("exact KL traces need D <= 20");
  if (sweeps < 1) throw DomainError("sweeps must be at least 1");
  for (double b : betas) with_beta(family, b).validate();
  const auto d = static_cast<Eigen::Index>(rbm.dim());
  Rng z_rng(seed, Stream::kDiag, 2000);
  const Matrix zs = exact_bipartite_samples(rbm, n_zeta, z_rng);
  std::vector<MfKlRow> rows;
  for (std::size_t n = 0; n < n_zeta; ++n) {
    Rng rho_rng(seed, Stream::kDiag, 3000 + n);
    Vector rho(d);
    for (Eigen::Index i = 0; i < d; ++i) rho[i] = rho_rng.uniform_open();
    for (double beta : betas) {
      const SmoothingKind kind = with_beta(family, beta);
      Vector zeta(d);
      for (Eigen::Index i = 0; i < d; ++i) zeta[i] = sample_inverse_cdf(kind, zs(static_cast<Eigen::Index>(n), i), rho[i]);
      const std::vector<double> trace = mean_field_kl_trace(rbm, coefficients(kind, zeta), sweeps);
      for (std::size_t s = 0; s < trace.size(); ++s) rows.push_back({beta, n, static_cast<int>(s), trace[s]});
    }
  }
  return rows;
}

std::vector<InvCdfRow> inverse_cdf_curves(Family family, const std::vector<double>& betas, double q,
                                          std::size_t n_points) {
  if (n_points < 2) throw DomainError("need at least two points");
  std::vector<InvCdfRow> rows;
  for (double beta : betas) {
    const SmoothingKind kind = with_beta(family, beta);
    for (std::size_t i = 0; i < n_points; ++i) {
      const double rho = (static_cast<double>(i) + 0.5) / static_cast<double>(n_points);
      const double zeta = sample_inverse_cdf(kind, q, rho);
      rows.push_back({beta, rho, zeta, implicit_grads(kind, q, zeta).dzeta_dq});
    }
  }
  return rows;
}

EvalResult evaluate_model(const Model& model, const Matrix& data, std::size_t k, double log_z, std::uint64_t seed) {
  if (data.rows() == 0) throw DomainError("evaluation data is empty");
  EvalResult out;
  out.log_z = log_z;
  out.rows = static_cast<std::size_t>(data.rows());
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    Rng rng(seed, Stream::kEval, static_cast<std::uint64_t>(r));
    const double ll = discrete_eval_ll(model, data.row(r).transpose(), k, log_z, rng).bound;
    sum += ll;
    sum_sq += ll * ll;
  }
  const auto n = static_cast<double>(data.rows());
  out.eval_ll = sum / n;
  out.std_error = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * out.eval_ll * out.eval_ll) / (n - 1.0)) / n) : 0.0;
  return out;
}

EvalResult evaluate_model(const Model& model, const Matrix& data, std::size_t k, const AisConfig& ais,
                          std::uint64_t seed) {
  Rng rng(seed, Stream::kAis, 0xE7A1);
  const AisResult z = ais_log_partition(model.prior(), ais, rng);
  EvalResult out = evaluate_model(model, data, k, z.log_z, seed);
  out.log_z_std_error = z.std_error;
  return out;
}

std::vector<PaVsPcdRow> pa_vs_pcd_report(const TrainConfig& base, const Dataset& data,
                                         const std::vector<std::size_t>& ks, std::size_t eval_k) {
  std::vector<PaVsPcdRow> rows;
  for (SamplerKind sampler : {SamplerKind::kPcd, SamplerKind::kPopulationAnnealing}) {
    for (std::size_t k : ks) {
      TrainConfig cfg = base;
      cfg.sampler.kind = sampler;
      cfg.k = k;
      TrainState state = init_train_state(cfg, static_cast<std::size_t>(data.train.cols()));
      double final_bound = 0.0;
      train_run(state, data.train, [&](const MetricsRow& r) { final_bound = r.bound; });
      const EvalResult e = evaluate_model(state.model, data.test, eval_k, cfg.ais, cfg.seed);
      rows.push_back({sampler, k, e.eval_ll, e.std_error, e.log_z, e.log_z_std_error, final_bound});
    }
  }
  return rows;
}

std::string gradvar_csv(const std::vector<GradVarianceRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,beta,mean_abs_dist,grad_variance,grad_mean,zeta_mean,saturated\n";
  for (const auto& r : rows)
    out << family_name(r.family) << ',' << r.beta << ',' << r.mean_abs_dist << ',' << r.grad_variance << ','
        << r.grad_mean << ',' << r.zeta_mean << ',' << r.saturated << '\n';
  return out.str();
}

std::string mfkl_csv(const std::vector<MfKlRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "beta,zeta_index,sweep,kl\n";
  for (const auto& r : rows) out << r.beta << ',' << r.zeta_index << ',' << r.sweep << ',' << r.kl << '\n';
  return out.str();
}

std::string invcdf_csv(const std::vector<InvCdfRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "beta,rho,zeta,dzeta_dq\n";
  for (const auto& r : rows) out << r.beta << ',' << r.rho << ',' << r.zeta << ',' << r.dzeta_dq << '\n';
  return out.str();
}

std::string pa_vs_pcd_csv(const std::vector<PaVsPcdRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "sampler,k,eval_ll,std_error,log_z,log_z_std_error,final_bound\n";
  for (const auto& r : rows)
    out << sampler_name(r.sampler) << ',' << r.k << ',' << r.eval_ll << ',' << r.std_error << ',' << r.log_z << ','
        << r.log_z_std_error << ',' << r.final_bound << '\n';
  return out.str();
}

}  // namespace relaxbm
