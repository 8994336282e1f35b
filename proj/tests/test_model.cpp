// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "relaxbm/error.hpp"
#include "relaxbm/model.hpp"
#include "relaxbm/reparam.hpp"

namespace relaxbm {
namespace {

ModelConfig small_config(SmoothingKind kind, std::size_t groups = 2, Arch arch = Arch::kLinear) {
  ModelConfig c;
  c.data_dim = 6;
  c.latent_first = 5;
  c.latent_second = 5;
  c.groups = groups;
  c.arch = arch;
  c.hidden = 4;
  c.smoothing = kind;
  return c;
}

// Initialized model with a non-trivial prior.
Model random_model(const ModelConfig& cfg, std::uint64_t seed, double prior_scale = 0.5) {
  Model m(cfg);
  Rng rng(seed);
  m.init(rng);
  for (const char* name : {"prior.a", "prior.W"}) {
    const auto& b = m.block(name);
    for (std::size_t i = 0; i < b.size; ++i) m.params()[b.offset + i] = prior_scale * rng.normal();
  }
  return m;
}

Vector random_binary(int n, Rng& rng) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return x;
}

Matrix random_noise(std::size_t k, std::size_t d, Rng& rng) {
  Matrix n(k, d);
  for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = 0.05 + 0.9 * rng.uniform();
  return n;
}

TEST(Network, GradientsMatchFiniteDifferences) {
  for (Arch arch : {Arch::kLinear, Arch::kMlp}) {
    const DenseNet net(4, 3, arch, 5);
    Rng rng(1);
    std::vector<double> p(net.num_params());
    net.init(p, rng);
    for (auto& v : p) v += 0.1 * rng.normal();
    const Vector x{{0.3, -1.0, 0.7, 0.2}};
    const Vector w{{0.5, -2.0, 1.0}};
    DenseNet::Tape tape;
    net.forward(p, x, &tape);
    std::vector<double> grad(p.size(), 0.0);
    const Vector dx = net.backward(p, tape, w, grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto up = p, dn = p;
      up[i] += h;
      dn[i] -= h;
      const double fd = (w.dot(net.forward(up, x)) - w.dot(net.forward(dn, x))) / (2 * h);
      EXPECT_NEAR(grad[i], fd, 1e-7 * std::max(1.0, std::abs(fd))) << arch_name(arch) << " " << i;
    }
    for (int i = 0; i < 4; ++i) {
      Vector up = x, dn = x;
      up[i] += h;
      dn[i] -= h;
      const double fd = (w.dot(net.forward(p, up)) - w.dot(net.forward(p, dn))) / (2 * h);
      EXPECT_NEAR(dx[i], fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
  EXPECT_EQ(parse_arch("mlp"), Arch::kMlp);
  EXPECT_THROW(parse_arch("conv"), ConfigError);
}

TEST(Config, Validation) {
  ModelConfig c = small_config(SmoothingKind::power(30.0), 3);
  EXPECT_THROW(c.validate(), ConfigError);
  c.groups = 5;
  EXPECT_NO_THROW(c.validate());
  c.smoothing = SmoothingKind::shifted_gaussian(4.0, 0.5);
  EXPECT_THROW(c.validate(), ConfigError);
  c.smoothing = SmoothingKind::shifted_gaussian(4.0, 0.0);
  EXPECT_EQ(c.prior_kind(), PriorKind::kGaussianIntegral);
  EXPECT_TRUE(Model(c).has_block("posterior.log_beta"));
  EXPECT_FALSE(Model(small_config(SmoothingKind::power(30.0))).has_block("posterior.log_beta"));
}

TEST(Model, InitializationScheme) {
  Model m(small_config(SmoothingKind::power(30.0)));
  Rng rng(2);
  m.init(rng);
  const auto& a = m.block("prior.a");
  const auto& w = m.block("prior.W");
  for (std::size_t i = 0; i < a.size; ++i) EXPECT_EQ(m.params()[a.offset + i], 0.0);
  for (std::size_t i = 0; i < w.size; ++i) EXPECT_LE(std::abs(m.params()[w.offset + i]), 0.01);
  const auto& dec = m.block("decoder");
  const double bound = 1.0 / std::sqrt(10.0);
  for (std::size_t i = 0; i < dec.size; ++i) EXPECT_LE(std::abs(m.params()[dec.offset + i]), bound);
}

TEST(Posterior, ZeroNetworkGivesHalf) {
  const SmoothingKind kind = SmoothingKind::exponential(8.0);
  Model m(small_config(kind, 1));
  m.params().setZero();
  Rng rng(3);
  const Vector x = random_binary(6, rng);
  const PosteriorSample s = posterior_sample(m, x, rng);
  double expected = 0.0;
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(s.logits[i], 0.0);
    expected += std::log(mixture_evaluate(kind, 0.5, s.zeta[i]).pdf);
  }
  EXPECT_NEAR(s.log_q, expected, 1e-12);
}

TEST(Posterior, Deterministic) {
  const Model m = random_model(small_config(SmoothingKind::power(30.0)), 4);
  Rng r0(5);
  const Vector x = random_binary(6, r0);
  Rng r1(6), r2(6);
  const auto a = posterior_sample(m, x, r1);
  const auto b = posterior_sample(m, x, r2);
  EXPECT_EQ(a.zeta, b.zeta);
  EXPECT_EQ(a.log_q, b.log_q);
}

TEST(Posterior, HierarchyOnlyLooksBackwards) {
  Model m = random_model(small_config(SmoothingKind::power(30.0), 2, Arch::kMlp), 7);
  Rng rng(8);
  const Vector x = random_binary(6, rng);
  Vector rho(10);
  for (int i = 0; i < 10; ++i) rho[i] = rng.uniform_open();
  const auto before = posterior_sample_from_noise(m, x, rho);
  const auto& g1 = m.block("posterior.g1");
  for (std::size_t i = 0; i < g1.size; ++i) m.params()[g1.offset + i] = rng.normal();
  const auto after = posterior_sample_from_noise(m, x, rho);
  EXPECT_EQ(before.zeta.head(5), after.zeta.head(5));
  EXPECT_NE(before.zeta.tail(5), after.zeta.tail(5));
}

TEST(Decoder, ZeroWeights) {
  Model m(small_config(SmoothingKind::power(30.0)));
  m.params().setZero();
  Rng rng(9);
  EXPECT_NEAR(decoder_log_likelihood(m, Vector::Constant(10, 0.3), random_binary(6, rng)), 6 * std::log(0.5), 1e-14);
}

TEST(Decoder, SaturatedLogits) {
  Model m(small_config(SmoothingKind::power(30.0)));
  m.params().setZero();
  const Vector x{{1, 0, 1, 1, 0, 0}};
  const auto& dec = m.block("decoder");
  const std::size_t bias = dec.offset + dec.size - 6;
  for (int j = 0; j < 6; ++j) m.params()[bias + j] = x[j] > 0.5 ? 60.0 : -60.0;
  const double ll = decoder_log_likelihood(m, Vector::Constant(10, 0.5), x);
  EXPECT_LE(ll, 0.0);
  EXPECT_GT(ll, -1e-20);
}

double max_rel_error(const Vector& g, const Vector& fd, std::size_t from, std::size_t to, double floor) {
  double worst = 0.0;
  for (std::size_t i = from; i < to; ++i)
    worst = std::max(worst, std::abs(g[i] - fd[i]) / std::max({std::abs(fd[i]), std::abs(g[i]), floor}));
  return worst;
}

TEST(Decoder, GradientThroughObjective) {
  // With a zero prior block contribution fixed, the decoder gradient of the
  // objective is the decoder likelihood gradient averaged under the weights.
  const Model m = random_model(small_config(SmoothingKind::power(30.0)), 10);
  Rng rng(11);
  Matrix batch(1, 6);
  batch.row(0) = random_binary(6, rng).transpose();
  const std::vector<Matrix> noise{random_noise(1, 10, rng)};
  const NegativePhase neg = negative_phase(exact_moments(m.prior()));
  const auto res = objective_and_gradient(m, batch, noise, neg, 1.0);
  const PosteriorSample s = posterior_sample_from_noise(m, batch.row(0).transpose(), noise[0].row(0).transpose());
  const auto& dec = m.block("decoder");
  const double h = 1e-6;
  for (std::size_t i = dec.offset; i < dec.offset + dec.size; ++i) {
    Model up = m, dn = m;
    up.params()[i] += h;
    dn.params()[i] -= h;
    const double fd = (decoder_log_likelihood(up, s.zeta, batch.row(0).transpose()) -
                       decoder_log_likelihood(dn, s.zeta, batch.row(0).transpose())) / (2 * h);
    EXPECT_NEAR(res.grad[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(IwBound, SingleSample) {
  const Model m = random_model(small_config(SmoothingKind::power(30.0)), 12);
  Rng rng(13);
  const Vector x = random_binary(6, rng);
  const auto b = iw_bound(m, x, 1, rng);
  ASSERT_EQ(b.log_w.size(), 1u);
  EXPECT_EQ(b.bound, b.log_w[0]);
  EXPECT_THROW(iw_bound(m, x, 0, rng), DomainError);
}

TEST(IwBound, ZeroVarianceWhenPosteriorIsPrior) {
  for (const auto& kind : {SmoothingKind::power(30.0), SmoothingKind::exponential(8.0)}) {
    Model m(small_config(kind, 1));
    m.params().setZero();
    const auto& dec = m.block("decoder");
    for (int j = 0; j < 6; ++j) m.params()[dec.offset + dec.size - 6 + j] = 0.3 * (j - 2);
    Rng rng(14);
    const Vector x = random_binary(6, rng);
    const auto b = iw_bound(m, x, 25, rng);
    double log_px = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double l = 0.3 * (j - 2);
      log_px += x[j] > 0.5 ? log_sigmoid(l) : log_sigmoid(-l);
    }
    const double log_z = exact_log_partition(m.prior());
    for (double lw : b.log_w) EXPECT_NEAR(lw - log_z, log_px, 1e-9) << family_name(kind.family);
    EXPECT_NEAR(b.bound - log_z, log_px, 1e-9);
  }
}

struct EndToEnd {
  double worst = 0.0;
  std::string worst_block;
};

EndToEnd end_to_end_check(const Model& m, double warmup, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = m.config().latent_dim();
  Matrix batch(2, m.config().data_dim);
  for (int r = 0; r < 2; ++r) batch.row(r) = random_binary(static_cast<int>(m.config().data_dim), rng).transpose();
  const std::vector<Matrix> noise{random_noise(3, d, rng), random_noise(3, d, rng)};
  const NegativePhase neg = negative_phase(exact_moments(m.prior()));
  const auto res = objective_and_gradient(m, batch, noise, neg, warmup);
  auto value = [&](const Model& mm) {
    NegativePhase unused = neg;
    return objective_and_gradient(mm, batch, noise, unused, warmup).value - warmup * exact_log_partition(mm.prior());
  };
  Vector fd(m.num_params());
  const double h = 1e-6;
  for (std::size_t i = 0; i < m.num_params(); ++i) {
    Model up = m, dn = m;
    up.params()[i] += h;
    dn.params()[i] -= h;
    fd[i] = (value(up) - value(dn)) / (2 * h);
  }
  EndToEnd out;
  for (const auto& b : m.blocks()) {
    const double e = max_rel_error(res.grad, fd, b.offset, b.offset + b.size, 1e-4);
    if (e > out.worst) out.worst = e, out.worst_block = b.name;
  }
  return out;
}

TEST(Objective, EndToEndOverlapping) {
  for (Arch arch : {Arch::kLinear, Arch::kMlp}) {
    ModelConfig cfg = small_config(SmoothingKind::power(30.0), 2, arch);
    cfg.mf_iterations = 300;
    const auto r = end_to_end_check(random_model(cfg, 15), 0.7, 16);
    EXPECT_LT(r.worst, 1e-3) << arch_name(arch) << " " << r.worst_block;
  }
}

TEST(Objective, EndToEndGaussianIntegral) {
  for (Arch arch : {Arch::kLinear, Arch::kMlp}) {
    ModelConfig cfg = small_config(SmoothingKind::shifted_gaussian(6.0, 0.0), 2, arch);
    const auto r = end_to_end_check(random_model(cfg, 17), 0.7, 18);
    EXPECT_LT(r.worst, 1e-3) << arch_name(arch) << " " << r.worst_block;
  }
}

TEST(Objective, EndToEndExponential) {
  ModelConfig cfg = small_config(SmoothingKind::exponential(8.0), 2, Arch::kLinear);
  cfg.mf_iterations = 300;
  const auto r = end_to_end_check(random_model(cfg, 19), 1.0, 20);
  EXPECT_LT(r.worst, 1e-3) << r.worst_block;
}

TEST(Adam, ZeroLearningRateKeepsState) {
  Model m = random_model(small_config(SmoothingKind::power(30.0)), 21);
  const Vector before = m.params();
  AdamState adam = make_adam_state(m.num_params());
  AdamConfig cfg;
  cfg.learning_rate = 0.0;
  Rng rng(22);
  Matrix batch(3, 6);
  for (int r = 0; r < 3; ++r) batch.row(r) = random_binary(6, rng).transpose();
  const auto metrics = iw_gradient_step(m, adam, cfg, batch, 5, negative_phase(exact_moments(m.prior())), 1.0, rng);
  EXPECT_FALSE(metrics.skipped);
  EXPECT_EQ(m.params(), before);
  EXPECT_TRUE(std::isfinite(metrics.bound));
}

TEST(Adam, AscentDirection) {
  Vector p = Vector::Zero(3);
  AdamState s = make_adam_state(3);
  adam_update(p, Vector{{1.0, -2.0, 0.0}}, s, AdamConfig{});
  EXPECT_NEAR(p[0], 1e-3, 1e-9);
  EXPECT_NEAR(p[1], -1e-3, 1e-9);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, NonFiniteGradientSkipsUpdate) {
  Model m = random_model(small_config(SmoothingKind::power(30.0)), 23);
  const auto& dec = m.block("decoder");
  m.params()[dec.offset] = NAN;
  const Vector before = m.params();
  AdamState adam = make_adam_state(m.num_params());
  Rng rng(24);
  Matrix batch(1, 6);
  batch.row(0) = random_binary(6, rng).transpose();
  const auto metrics =
      iw_gradient_step(m, adam, AdamConfig{}, batch, 2, negative_phase(exact_moments(m.prior())), 1.0, rng);
  EXPECT_TRUE(metrics.skipped);
  EXPECT_EQ(adam.step, 0u);
  for (Eigen::Index i = 0; i < before.size(); ++i)
    if (!std::isnan(before[i])) {
      EXPECT_EQ(m.params()[i], before[i]);
    }
}

TEST(Adam, TrainingImprovesBound) {
  // Separable synthetic data: two complementary prototypes.
  std::vector<double> gains;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ModelConfig cfg = small_config(SmoothingKind::power(30.0), 2);
    cfg.data_dim = 8;
    Model m(cfg);
    Rng rng(seed, Stream::kInit, 0);
    m.init(rng);
    Matrix data(40, 8);
    for (int r = 0; r < 40; ++r)
      for (int j = 0; j < 8; ++j) data(r, j) = ((r % 2) ^ (j % 2)) ? 1.0 : 0.0;
    AdamState adam = make_adam_state(m.num_params());
    AdamConfig ac;
    ac.learning_rate = 1e-2;
    auto mean_bound = [&]() {
      Rng ev(seed, Stream::kEval, 0);
      double total = 0.0;
      for (int r = 0; r < 40; ++r) total += iw_bound(m, data.row(r).transpose(), 5, ev).bound - exact_log_partition(m.prior());
      return total / 40.0;
    };
    const double start = mean_bound();
    for (int u = 0; u < 200; ++u) {
      Rng ur(seed, Stream::kUpdate, u);
      Matrix batch = data.middleRows((u * 10) % 40, 10);
      iw_gradient_step(m, adam, ac, batch, 5, negative_phase(exact_moments(m.prior())), 1.0, ur);
    }
    gains.push_back(mean_bound() - start);
  }
  std::sort(gains.begin(), gains.end());
  EXPECT_GT(gains[2], 0.0);
}

// Independent discrete marginal: Σ_z exp(−E(z) − log Z + log p(x|z)).
double discrete_oracle(const Model& m, const Vector& x) {
  const Rbm rbm = m.prior();
  const int d = static_cast<int>(rbm.dim());
  const double log_z = oracle::naive_log_sum(rbm.biases(), rbm.couplings());
  std::vector<double> t;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << d); ++s) {
    const Vector z = oracle::state(s, d);
    t.push_back(-oracle::naive_energy(rbm.biases(), rbm.couplings(), z) - log_z + decoder_log_likelihood(m, z, x));
  }
  return oracle::naive_lse(t);
}

TEST(DiscreteEval, ExactEnumeration) {
  const Model m = random_model(small_config(SmoothingKind::power(30.0)), 25);
  Rng rng(26);
  const Vector x = random_binary(6, rng);
  EXPECT_NEAR(exact_discrete_log_likelihood(m, x, exact_log_partition(m.prior())), discrete_oracle(m, x), 1e-10);
}

TEST(DiscreteEval, ConstantWeights) {
  Model m(small_config(SmoothingKind::power(30.0), 2));
  m.params().setZero();
  const auto& dec = m.block("decoder");
  for (int j = 0; j < 6; ++j) m.params()[dec.offset + dec.size - 6 + j] = 0.4 * j - 1.0;
  Rng rng(27);
  const Vector x = random_binary(6, rng);
  const double log_z = 10 * std::log(2.0);
  const auto b = discrete_eval_ll(m, x, 50, log_z, rng);
  const double exact = discrete_oracle(m, x);
  for (double lw : b.log_w) EXPECT_NEAR(lw, exact, 1e-12);
  EXPECT_NEAR(b.bound, exact, 1e-12);
}

TEST(DiscreteEval, WithinBootstrapErrorOfExact) {
  const Model m = random_model(small_config(SmoothingKind::power(30.0), 2, Arch::kMlp), 28);
  Rng rng(29);
  const double log_z = exact_log_partition(m.prior());
  for (int rep = 0; rep < 3; ++rep) {
    const Vector x = random_binary(6, rng);
    const auto b = discrete_eval_ll(m, x, 4000, log_z, rng);
    // Bootstrap standard error of the log-mean-exp.
    Rng boot(30, Stream::kBootstrap, rep);
    std::vector<double> ests;
    for (int r = 0; r < 200; ++r) {
      LogSumExp acc;
      for (std::size_t i = 0; i < b.log_w.size(); ++i) acc.add(b.log_w[boot.below(b.log_w.size())]);
      ests.push_back(acc.value() - std::log(static_cast<double>(b.log_w.size())));
    }
    double mean = 0.0, var = 0.0;
    for (double e : ests) mean += e / ests.size();
    for (double e : ests) var += (e - mean) * (e - mean) / (ests.size() - 1);
    EXPECT_NEAR(b.bound, discrete_oracle(m, x), 3.0 * std::sqrt(var)) << rep;
  }
  EXPECT_THROW(discrete_eval_ll(m, Vector::Zero(6), 10, NAN, rng), DomainError);
}

TEST(Relaxation, ConvergesToDiscreteAsBetaGrows) {
  // D=6: exact relaxed marginal likelihood E_{ζ~p(ζ)}[p(x|ζ)] (exact z, then ζ ~ r(·|z))
  // against the exact discrete likelihood; common random numbers across β.
  ModelConfig cfg = small_config(SmoothingKind::power(8.0), 1);
  cfg.latent_first = 3;
  cfg.latent_second = 3;
  const Model base = random_model(cfg, 31, 1.0);
  const Rbm rbm = base.prior();
  Rng rng(32);
  const Vector x = random_binary(6, rng);
  const double exact = discrete_oracle(base, x);
  const double log_z = exact_log_partition(rbm);
  const int n = 20000;
  std::vector<Vector> zs;
  std::vector<Vector> rhos;
  for (int s = 0; s < n; ++s) {
    double u = rng.uniform();
    Vector z;
    for (std::uint64_t c = 0; c < 64; ++c) {
      z = oracle::state(c, 6);
      u -= std::exp(-energy(rbm, z) - log_z);
      if (u < 0) break;
    }
    zs.push_back(z);
    Vector r(6);
    for (int i = 0; i < 6; ++i) r[i] = rng.uniform_open();
    rhos.push_back(r);
  }
  double prev = INFINITY;
  for (double beta : {8.0, 16.0, 32.0, 64.0}) {
    const SmoothingKind kind = SmoothingKind::power(beta);
    LogSumExp acc;
    for (int s = 0; s < n; ++s) {
      Vector zeta(6);
      for (int i = 0; i < 6; ++i) zeta[i] = sample_inverse_cdf(kind, zs[s][i], rhos[s][i]);
      acc.add(decoder_log_likelihood(base, zeta, x));
    }
    const double gap = std::abs(acc.value() - std::log(static_cast<double>(n)) - exact);
    EXPECT_LT(gap, prev) << beta;
    prev = gap;
  }
}

}  // namespace
}  // namespace relaxbm
