// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix minibatch(const TrainConfig& config, const Matrix& data, std::size_t update) {
  const auto n = static_cast<std::size_t>(data.rows());
  const std::size_t b = std::min(config.batch_size, n);
  const std::size_t per_epoch = n / b;
  const std::size_t epoch = update / per_epoch, slot = update % per_epoch;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed, Stream::kData, epoch + 16);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  Matrix out(static_cast<Eigen::Index>(b), data.cols());
  for (std::size_t r = 0; r < b; ++r)
    out.row(static_cast<Eigen::Index>(r)) = data.row(static_cast<Eigen::Index>(order[slot * b + r]));
  return out;
}

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TrainState init_train_state(const TrainConfig& config, std::size_t data_dim) {
  TrainConfig resolved = config;
  resolved.model.data_dim = data_dim;
  resolved.validate();
  TrainState state{resolved, Model(resolved.model), {}, 0, std::nullopt, kNaN, kNaN};
  Rng rng(resolved.seed, Stream::kInit, 0);
  state.model.init(rng);
  state.adam = make_adam_state(state.model.num_params());
  if (resolved.sampler.kind == SamplerKind::kPcd) {
    Rng chain_rng(resolved.seed, Stream::kInit, 1);
    state.chains = init_persistent_chains(state.model.prior(), resolved.sampler.chains, chain_rng);
  }
  return state;
}

double warmup_weight(const TrainConfig& config, std::size_t update) {
  const double span = config.warmup_fraction * static_cast<double>(config.updates);
  if (span <= 0.0) return 1.0;
  return std::min(1.0, static_cast<double>(update) / span);
}

AisResult log_partition_snapshot(const TrainState& state) {
  Rng rng(state.config.seed, Stream::kAis, state.update);
  return ais_log_partition(state.model.prior(), state.config.ais, rng);
}

void train_run(TrainState& state, const Matrix& data, const std::function<void(const MetricsRow&)>& on_row,
               const std::function<void(const TrainState&)>& on_checkpoint) {
  const TrainConfig& cfg = state.config;
  if (static_cast<std::size_t>(data.cols()) != cfg.model.data_dim)
    throw DimensionError("training data width does not match the model");
  if (state.update < cfg.updates && data.rows() == 0) throw DomainError("training data is empty");
  const auto start = std::chrono::steady_clock::now();
  const bool record_kl = cfg.model.prior_kind() == PriorKind::kOverlapping && cfg.model.latent_dim() <= 20;
  while (state.update < cfg.updates) {
    const std::size_t u = state.update;
    const Rbm rbm = state.model.prior();
    Rng neg_rng(cfg.seed, Stream::kNegative, u);
    NegativePhase negative;
    if (cfg.sampler.kind == SamplerKind::kPcd) {
      if (!state.chains) throw ConfigError("PCD state is missing its persistent chains");
      negative = negative_phase(pcd_negative_samples(rbm, *state.chains, cfg.sampler, neg_rng));
    } else {
      negative = negative_phase(population_annealing_run(rbm, cfg.sampler, neg_rng).samples);
    }
    const Matrix batch = minibatch(cfg, data, u);
    Rng step_rng(cfg.seed, Stream::kUpdate, u);
    const StepMetrics m = iw_gradient_step(state.model, state.adam, cfg.adam, batch, cfg.k, negative,
                                           warmup_weight(cfg, u), step_rng, record_kl);
    ++state.update;
    MetricsRow row{u, m.bound, kNaN, m.grad_norm, m.mf_kl_median, 0.0, m.skipped};
    const bool last = state.update == cfg.updates;
    if ((cfg.ais_every > 0 && state.update % cfg.ais_every == 0) || last) {
      const AisResult ais = log_partition_snapshot(state);
      state.log_z = ais.log_z;
      state.log_z_std_error = ais.std_error;
      row.log_z_snapshot = ais.log_z;
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_row) on_row(row);
    if (on_checkpoint && cfg.checkpoint_every > 0 && state.update % cfg.checkpoint_every == 0) on_checkpoint(state);
  }
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  KvContainer out;
  out.put("format", "relaxbm-checkpoint");
  out.put("config", format_key_values(to_key_values(state.config)));
  out.put("data_dim", static_cast<std::int64_t>(state.config.model.data_dim));
  out.put("update", static_cast<std::int64_t>(state.update));
  out.put("params", to_vector(state.model.params()));
  out.put("adam.m", to_vector(state.adam.m));
  out.put("adam.v", to_vector(state.adam.v));
  out.put("adam.step", static_cast<std::int64_t>(state.adam.step));
  const std::vector<double> log_z{state.log_z, state.log_z_std_error};
  out.put("log_z", log_z);
  if (state.chains) {
    const Matrix& s = state.chains->states;
    out.put("pcd.shape", std::vector<std::int64_t>{s.rows(), s.cols()});
    out.put("pcd.states", std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
  }
  save_rbm(out, state.model.prior(), "rbm.");
  out.save(path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  const KvContainer in = KvContainer::load(path);
  if (!in.contains("format") || in.get_string("format") != "relaxbm-checkpoint")
    throw FormatError(path.string() + " is not a relaxbm checkpoint");
  const TrainConfig config = train_config_from_key_values(parse_key_values(in.get_string("config")));
  TrainState state = init_train_state(config, static_cast<std::size_t>(in.get_int("data_dim")));
  const auto& params = in.get_reals("params");
  if (params.size() != state.model.num_params()) throw FormatError("checkpoint parameter count does not match its config");
  state.model.params() = to_eigen(params);
  state.adam.m = to_eigen(in.get_reals("adam.m"));
  state.adam.v = to_eigen(in.get_reals("adam.v"));
  if (static_cast<std::size_t>(state.adam.m.size()) != params.size() ||
      static_cast<std::size_t>(state.adam.v.size()) != params.size())
    throw FormatError("checkpoint optimizer state does not match its parameters");
  state.adam.step = static_cast<std::uint64_t>(in.get_int("adam.step"));
  state.update = static_cast<std::size_t>(in.get_int("update"));
  const auto& log_z = in.get_reals("log_z");
  if (log_z.size() != 2) throw FormatError("checkpoint log_z entry is malformed");
  state.log_z = log_z[0];
  state.log_z_std_error = log_z[1];
  if (in.contains("pcd.states")) {
    const auto& shape = in.get_ints("pcd.shape");
    const auto& values = in.get_reals("pcd.states");
    if (shape.size() != 2 || static_cast<std::size_t>(shape[0] * shape[1]) != values.size())
      throw FormatError("checkpoint chain states are malformed");
    state.chains = PersistentChains{Eigen::Map<const Matrix>(values.data(), shape[0], shape[1])};
  } else if (state.config.sampler.kind == SamplerKind::kPcd) {
    throw FormatError("PCD checkpoint is missing its chains");
  }
  return state;
}

std::string metrics_header(const TrainConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) out += "# " + k + "=" + v + "\n";
  out += "update,bound,logZ_snapshot,grad_norm,mf_kl_median,wall_time\n";
  return out;
}

std::string metrics_line(const MetricsRow& row) {
  auto real = [](double v) { return std::isnan(v) ? std::string() : format_real(v); };
  return std::to_string(row.update) + "," + real(row.bound) + "," + real(row.log_z_snapshot) + "," +
         real(row.grad_norm) + "," + real(row.mf_kl_median) + "," + format_real(row.wall_time) + "\n";
}

}  // namespace relaxbm
