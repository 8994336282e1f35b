// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "relaxbm/error.hpp"
#include "relaxbm/reparam.hpp"

namespace relaxbm {
namespace {

std::span<const double> view(const Vector& params, const ParamBlock& b) {
  return {params.data() + b.offset, b.size};
}

std::span<double> view(Vector& params, const ParamBlock& b) { return {params.data() + b.offset, b.size}; }

/// Prior prepared once per parameter setting.
struct PriorEval {
  Rbm rbm;
  std::optional<GitPrior> git;
};

PriorEval prepare_prior(const Model& model) {
  PriorEval out{model.prior(), std::nullopt};
  if (model.config().prior_kind() == PriorKind::kGaussianIntegral)
    out.git = git_prepare(out.rbm, model.config().smoothing.beta);
  return out;
}

struct PriorValue {
  double value = 0.0;
  MeanFieldSolution mf;  // overlapping prior only
};

PriorValue prior_value(const Model& model, const PriorEval& prior, const Vector& zeta) {
  if (prior.git) return {git_log_prob(*prior.git, prior.rbm, zeta), {}};
  RelaxedLogProb r = relaxed_log_prob(prior.rbm, model.config().smoothing, zeta, model.config().mf_iterations);
  return {r.value, std::move(r.mean_field)};
}

double bernoulli_log_likelihood(const Vector& logits, const Vector& x) {
  double ll = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) ll += x[j] * logits[j] - softplus(logits[j]);
  return ll;
}

void check_x(const Model& model, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != model.config().data_dim)
    throw DimensionError("x has " + std::to_string(x.size()) + " entries, the model expects " +
                         std::to_string(model.config().data_dim));
}

Vector network_input(const Vector& x, const Vector& zeta, std::size_t prefix) {
  Vector in(x.size() + static_cast<Eigen::Index>(prefix));
  in.head(x.size()) = x;
  in.tail(static_cast<Eigen::Index>(prefix)) = zeta.head(static_cast<Eigen::Index>(prefix));
  return in;
}

/// Forward record of one posterior sample, enough for the reverse pass.
struct SampleTrace {
  PosteriorSample sample;
  std::vector<DenseNet::Tape> tapes;
  std::vector<MixtureLogDensity> log_density;
  std::vector<ImplicitGrads> implicit;
};

SampleTrace trace_posterior(const Model& model, const Vector& x, const Vector& rho) {
  const ModelConfig& cfg = model.config();
  const std::size_t d = cfg.latent_dim(), gs = cfg.group_size();
  const bool git = cfg.prior_kind() == PriorKind::kGaussianIntegral;
  if (static_cast<std::size_t>(rho.size()) != d) throw DimensionError("noise has the wrong size");
  SampleTrace t;
  t.sample.zeta = Vector::Zero(static_cast<Eigen::Index>(d));
  t.sample.logits = Vector::Zero(static_cast<Eigen::Index>(d));
  t.sample.shifts = Vector::Zero(static_cast<Eigen::Index>(d));
  t.tapes.resize(cfg.groups);
  t.log_density.resize(d);
  t.implicit.resize(d);
  for (std::size_t g = 0; g < cfg.groups; ++g) {
    const ParamBlock& pb = model.block("posterior.g" + std::to_string(g));
    const Vector out =
        model.posterior_net(g).forward(view(model.params(), pb), network_input(x, t.sample.zeta, g * gs), &t.tapes[g]);
    for (std::size_t j = 0; j < gs; ++j) {
      const std::size_t i = g * gs + j;
      const auto ii = static_cast<Eigen::Index>(i);
      const double logit = out[static_cast<Eigen::Index>(j)];
      const double shift = git ? out[static_cast<Eigen::Index>(gs + j)] : 0.0;
      const SmoothingKind kind = model.posterior_kind(i, shift);
      const double q = sigmoid(logit);
      const double zeta = sample_inverse_cdf(kind, q, rho[ii]);
      t.sample.logits[ii] = logit;
      t.sample.shifts[ii] = shift;
      t.sample.zeta[ii] = zeta;
      t.log_density[i] = mixture_log_density(kind, logit, zeta);
      t.implicit[i] = implicit_grads(kind, q, zeta);
      t.sample.log_q += t.log_density[i].log_pdf;
    }
  }
  return t;
}

}  // namespace

void ModelConfig::validate() const {
  smoothing.validate();
  if (data_dim == 0) throw ConfigError("data dimension must be positive");
  if (latent_first == 0 || latent_second == 0) throw ConfigError("both RBM sides need at least one unit");
  if (groups == 0 || latent_dim() % groups != 0)
    throw ConfigError("latent dimension " + std::to_string(latent_dim()) + " is not divisible by groups=" +
                      std::to_string(groups));
  if (arch == Arch::kMlp && hidden == 0) throw ConfigError("hidden width must be positive");
  if (mf_iterations < 1) throw ConfigError("mean-field iterations must be at least 1");
  if (smoothing.family == Family::kShiftedGaussian && smoothing.shift != 0.0)
    throw ConfigError("the shifted Gaussian shift comes from the posterior network; leave it at 0");
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t d = config_.latent_dim(), gs = config_.group_size();
  const bool git = config_.prior_kind() == PriorKind::kGaussianIntegral;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t size) {
    blocks_.push_back({std::move(name), offset, size});
    offset += size;
  };
  add("prior.a", d);
  add("prior.W", config_.latent_first * config_.latent_second);
  for (std::size_t g = 0; g < config_.groups; ++g) {
    posterior_nets_.emplace_back(config_.data_dim + g * gs, git ? 2 * gs : gs, config_.arch, config_.hidden);
    add("posterior.g" + std::to_string(g), posterior_nets_.back().num_params());
  }
  if (git) add("posterior.log_beta", d);
  decoder_ = DenseNet(d, config_.data_dim, config_.arch, config_.hidden);
  add("decoder", decoder_.num_params());
  params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
}

const ParamBlock& Model::block(std::string_view name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return b;
  throw ConfigError("no parameter block named '" + std::string(name) + "'");
}

bool Model::has_block(std::string_view name) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const ParamBlock& b) { return b.name == name; });
}

void Model::init(Rng& rng) {
  params_.setZero();
  for (auto& w : view(params_, block("prior.W"))) w = 0.01 * (2.0 * rng.uniform() - 1.0);
  for (std::size_t g = 0; g < config_.groups; ++g)
    posterior_nets_[g].init(view(params_, block("posterior.g" + std::to_string(g))), rng);
  if (has_block("posterior.log_beta"))
    for (auto& v : view(params_, block("posterior.log_beta"))) v = std::log(config_.smoothing.beta);
  decoder_.init(view(params_, block("decoder")), rng);
}

Rbm Model::prior() const {
  const ParamBlock& a = block("prior.a");
  const ParamBlock& w = block("prior.W");
  const Vector biases = params_.segment(static_cast<Eigen::Index>(a.offset), static_cast<Eigen::Index>(a.size));
  const Matrix cross = Eigen::Map<const Matrix>(params_.data() + w.offset,
                                                static_cast<Eigen::Index>(config_.latent_first),
                                                static_cast<Eigen::Index>(config_.latent_second));
  return Rbm::bipartite(biases, cross);
}

SmoothingKind Model::posterior_kind(std::size_t unit, double shift) const {
  if (config_.prior_kind() == PriorKind::kOverlapping) return config_.smoothing;
  const ParamBlock& b = block("posterior.log_beta");
  return SmoothingKind::shifted_gaussian(std::exp(params_[static_cast<Eigen::Index>(b.offset + unit)]), shift);
}

PosteriorSample posterior_sample_from_noise(const Model& model, const Vector& x, const Vector& rho) {
  check_x(model, x);
  return trace_posterior(model, x, rho).sample;
}

PosteriorSample posterior_sample(const Model& model, const Vector& x, Rng& rng) {
  Vector rho(static_cast<Eigen::Index>(model.config().latent_dim()));
  for (Eigen::Index i = 0; i < rho.size(); ++i) rho[i] = rng.uniform_open();
  return posterior_sample_from_noise(model, x, rho);
}

double decoder_log_likelihood(const Model& model, const Vector& zeta, const Vector& x) {
  check_x(model, x);
  if (static_cast<std::size_t>(zeta.size()) != model.config().latent_dim())
    throw DimensionError("zeta has the wrong size");
  const Vector logits = model.decoder_net().forward(view(model.params(), model.block("decoder")), zeta);
  return bernoulli_log_likelihood(logits, x);
}

double prior_log_prob(const Model& model, const Vector& zeta) {
  return prior_value(model, prepare_prior(model), zeta).value;
}

IwBound iw_bound_from_noise(const Model& model, const Vector& x, const Matrix& noise, double warmup) {
  check_x(model, x);
  if (noise.rows() < 1) throw DomainError("the bound needs K >= 1 samples");
  const PriorEval prior = prepare_prior(model);
  IwBound out;
  out.log_w.reserve(static_cast<std::size_t>(noise.rows()));
  for (Eigen::Index k = 0; k < noise.rows(); ++k) {
    const PosteriorSample s = trace_posterior(model, x, noise.row(k).transpose()).sample;
    const double p = prior_value(model, prior, s.zeta).value;
    out.log_w.push_back(warmup * (p - s.log_q) + decoder_log_likelihood(model, s.zeta, x));
  }
  out.bound = log_mean_exp(out.log_w);
  return out;
}

IwBound iw_bound(const Model& model, const Vector& x, std::size_t k, Rng& rng, double warmup) {
  if (k < 1) throw DomainError("the bound needs K >= 1 samples");
  Matrix noise(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(model.config().latent_dim()));
  for (Eigen::Index r = 0; r < noise.rows(); ++r)
    for (Eigen::Index c = 0; c < noise.cols(); ++c) noise(r, c) = rng.uniform_open();
  return iw_bound_from_noise(model, x, noise, warmup);
}

ObjectiveResult objective_and_gradient(const Model& model, const Matrix& batch, const std::vector<Matrix>& noise,
                                       const NegativePhase& negative, double warmup, bool record_mf_kl) {
  const ModelConfig& cfg = model.config();
  const std::size_t d = cfg.latent_dim(), gs = cfg.group_size();
  const auto di = static_cast<Eigen::Index>(d);
  const bool git = cfg.prior_kind() == PriorKind::kGaussianIntegral;
  if (batch.rows() == 0) throw DomainError("minibatch is empty");
  if (noise.size() != static_cast<std::size_t>(batch.rows())) throw DimensionError("need one noise matrix per datum");
  if (negative.mean.size() != di) throw DimensionError("negative phase has the wrong size");

  const PriorEval prior = prepare_prior(model);
  const Vector& params = model.params();
  ObjectiveResult out;
  out.grad = Vector::Zero(params.size());
  const ParamBlock& a_block = model.block("prior.a");
  const ParamBlock& w_block = model.block("prior.W");
  const ParamBlock& dec_block = model.block("decoder");
  const auto d1 = static_cast<Eigen::Index>(cfg.latent_first), d2 = static_cast<Eigen::Index>(cfg.latent_second);
  Eigen::Map<Vector> grad_a(out.grad.data() + a_block.offset, di);
  Eigen::Map<Matrix> grad_w(out.grad.data() + w_block.offset, d1, d2);
  std::span<double> grad_dec = view(out.grad, dec_block);
  const double scale = 1.0 / static_cast<double>(batch.rows());

  for (Eigen::Index n = 0; n < batch.rows(); ++n) {
    const Vector x = batch.row(n).transpose();
    check_x(model, x);
    const Matrix& rho = noise[static_cast<std::size_t>(n)];
    if (rho.rows() < 1 || rho.cols() != di) throw DimensionError("noise matrix has the wrong shape");
    const auto k_count = static_cast<std::size_t>(rho.rows());

    std::vector<SampleTrace> traces;
    std::vector<PriorValue> priors;
    std::vector<DenseNet::Tape> dec_tapes(k_count);
    std::vector<Vector> dec_logits(k_count);
    std::vector<double> log_w(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      traces.push_back(trace_posterior(model, x, rho.row(static_cast<Eigen::Index>(k)).transpose()));
      const Vector& zeta = traces.back().sample.zeta;
      priors.push_back(prior_value(model, prior, zeta));
      dec_logits[k] = model.decoder_net().forward(view(params, dec_block), zeta, &dec_tapes[k]);
      log_w[k] = warmup * (priors.back().value - traces.back().sample.log_q) +
                 bernoulli_log_likelihood(dec_logits[k], x);
      if (record_mf_kl && n == 0 && !git && d <= 20)
        out.mf_kl.push_back(mean_field_kl_exact(prior.rbm, coefficients(cfg.smoothing, zeta), priors.back().mf.m));
    }
    const double bound = log_mean_exp(log_w);
    out.value += scale * bound;

    // Negative phase; the normalized weights sum to one.
    grad_a -= scale * warmup * negative.mean;
    grad_w -= scale * warmup * negative.second.block(0, d1, d1, d2);

    for (std::size_t k = 0; k < k_count; ++k) {
      const double wk = scale * std::exp(log_w[k] - bound - std::log(static_cast<double>(k_count)));
      if (wk == 0.0) continue;
      const SampleTrace& t = traces[k];
      const Vector& zeta = t.sample.zeta;

      const PriorGradients pg = prior.git ? git_positive_grads(*prior.git, prior.rbm, zeta)
                                          : relaxed_positive_grads(prior.rbm, cfg.smoothing, zeta, priors[k].mf);
      grad_a += wk * warmup * pg.grad_a;
      grad_w += wk * warmup * pg.grad_W.block(0, d1, d1, d2);

      Vector d_logits(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) d_logits[j] = wk * (x[j] - sigmoid(dec_logits[k][j]));
      Vector g_zeta = model.decoder_net().backward(view(params, dec_block), dec_tapes[k], d_logits, grad_dec);
      g_zeta += wk * warmup * pg.grad_zeta;

      for (std::size_t g = cfg.groups; g-- > 0;) {
        const DenseNet& net = model.posterior_net(g);
        Vector d_out = Vector::Zero(static_cast<Eigen::Index>(net.outputs()));
        for (std::size_t j = 0; j < gs; ++j) {
          const std::size_t i = g * gs + j;
          const auto ii = static_cast<Eigen::Index>(i);
          const MixtureLogDensity& ld = t.log_density[i];
          const ImplicitGrads& ig = t.implicit[i];
          if (ig.saturated) ++out.saturated;
          const double through_zeta = g_zeta[ii];
          g_zeta[ii] -= wk * warmup * ld.d_zeta;
          const double q = sigmoid(t.sample.logits[ii]);
          d_out[static_cast<Eigen::Index>(j)] = g_zeta[ii] * ig.dzeta_dq * q * (1.0 - q) - wk * warmup * ld.d_logit;
          if (git) {
            d_out[static_cast<Eigen::Index>(gs + j)] = through_zeta;
            const ParamBlock& lb = model.block("posterior.log_beta");
            const double beta = std::exp(params[static_cast<Eigen::Index>(lb.offset + i)]);
            out.grad[static_cast<Eigen::Index>(lb.offset + i)] +=
                beta * (g_zeta[ii] * ig.dzeta_dbeta - wk * warmup * ld.d_beta);
          }
        }
        const ParamBlock& pb = model.block("posterior.g" + std::to_string(g));
        const Vector d_in = net.backward(view(params, pb), t.tapes[g], d_out, view(out.grad, pb));
        const auto prefix = static_cast<Eigen::Index>(g * gs);
        g_zeta.head(prefix) += d_in.tail(prefix);
      }
    }
  }
  return out;
}

AdamState make_adam_state(std::size_t n) {
  return {Vector::Zero(static_cast<Eigen::Index>(n)), Vector::Zero(static_cast<Eigen::Index>(n)), 0};
}

void adam_update(Vector& params, const Vector& grad, AdamState& state, const AdamConfig& config) {
  if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw DimensionError("optimizer state does not match the parameters");
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params[i] += config.learning_rate * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + config.epsilon);
  }
}

StepMetrics iw_gradient_step(Model& model, AdamState& adam, const AdamConfig& adam_config, const Matrix& batch,
                             std::size_t k, const NegativePhase& negative, double warmup, Rng& rng,
                             bool record_mf_kl) {
  if (k < 1) throw DomainError("the bound needs K >= 1 samples");
  const auto d = static_cast<Eigen::Index>(model.config().latent_dim());
  std::vector<Matrix> noise(static_cast<std::size_t>(batch.rows()));
  for (auto& m : noise) {
    m.resize(static_cast<Eigen::Index>(k), d);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = rng.uniform_open();
  }
  StepMetrics metrics;
  metrics.mf_kl_median = std::numeric_limits<double>::quiet_NaN();
  const ObjectiveResult obj = objective_and_gradient(model, batch, noise, negative, warmup, record_mf_kl);
  metrics.bound = obj.value;
  metrics.grad_norm = obj.grad.norm();
  if (!obj.mf_kl.empty()) {
    std::vector<double> kl = obj.mf_kl;
    std::nth_element(kl.begin(), kl.begin() + static_cast<std::ptrdiff_t>(kl.size() / 2), kl.end());
    metrics.mf_kl_median = kl[kl.size() / 2];
  }
  if (!obj.grad.allFinite() || !std::isfinite(obj.value)) {
    metrics.skipped = true;
    metrics.skip_reason = "non-finite gradient";
    return metrics;
  }
  const Vector saved_params = model.params();
  const AdamState saved_adam = adam;
  adam_update(model.params(), obj.grad, adam, adam_config);
  try {
    if (!model.params().allFinite()) throw DomainError("non-finite parameters");
    if (model.config().prior_kind() == PriorKind::kGaussianIntegral)
      (void)git_prepare(model.prior(), model.config().smoothing.beta);
  } catch (const Error& e) {
    model.params() = saved_params;
    adam = saved_adam;
    metrics.skipped = true;
    metrics.skip_reason = e.what();
  }
  return metrics;
}

IwBound discrete_eval_ll(const Model& model, const Vector& x, std::size_t k, double log_z, Rng& rng) {
  check_x(model, x);
  if (k < 1) throw DomainError("the bound needs K >= 1 samples");
  if (!std::isfinite(log_z)) throw DomainError("discrete evaluation needs a finite log Z estimate");
  const ModelConfig& cfg = model.config();
  const std::size_t gs = cfg.group_size();
  const Rbm rbm = model.prior();
  IwBound out;
  out.log_w.reserve(k);
  Vector z(static_cast<Eigen::Index>(cfg.latent_dim()));
  for (std::size_t s = 0; s < k; ++s) {
    z.setZero();
    double log_q = 0.0;
    for (std::size_t g = 0; g < cfg.groups; ++g) {
      const Vector o = model.posterior_net(g).forward(view(model.params(), model.block("posterior.g" + std::to_string(g))),
                                                      network_input(x, z, g * gs));
      for (std::size_t j = 0; j < gs; ++j) {
        const double logit = o[static_cast<Eigen::Index>(j)];
        const bool on = rng.uniform() < sigmoid(logit);
        z[static_cast<Eigen::Index>(g * gs + j)] = on ? 1.0 : 0.0;
        log_q += on ? log_sigmoid(logit) : log_sigmoid(-logit);
      }
    }
    out.log_w.push_back(-energy(rbm, z) - log_z + decoder_log_likelihood(model, z, x) - log_q);
  }
  out.bound = log_mean_exp(out.log_w);
  return out;
}

double exact_discrete_log_likelihood(const Model& model, const Vector& x, double log_z) {
  check_x(model, x);
  const std::size_t d = model.config().latent_dim();
  if (d > 20) throw TooLargeError("exact enumeration needs D <= 20");
  const Rbm rbm = model.prior();
  LogSumExp acc;
  Vector z(static_cast<Eigen::Index>(d));
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << d); ++s) {
    for (std::size_t i = 0; i < d; ++i) z[static_cast<Eigen::Index>(i)] = static_cast<double>((s >> i) & 1U);
    acc.add(-energy(rbm, z) - log_z + decoder_log_likelihood(model, z, x));
  }
  return acc.value();
}

}  // namespace relaxbm
