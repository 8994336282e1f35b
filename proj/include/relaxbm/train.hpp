// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "relaxbm/config.hpp"
#include "relaxbm/model.hpp"
#include "relaxbm/samplers.hpp"

namespace relaxbm {

struct TrainState {
  TrainConfig config;
  Model model;
  AdamState adam;
  std::size_t update = 0;  // updates completed
  std::optional<PersistentChains> chains;
  double log_z = 0.0;  // most recent AIS estimate, NaN when none
  double log_z_std_error = 0.0;
};

struct MetricsRow {
  std::size_t update = 0;
  double bound = 0.0;
  double log_z_snapshot = 0.0;  // NaN unless AIS ran after this update
  double grad_norm = 0.0;
  double mf_kl_median = 0.0;
  double wall_time = 0.0;  // seconds since the run (or resume) started
  bool skipped = false;
};

/// Fresh state: validated config, initialized model and optimizer.
TrainState init_train_state(const TrainConfig& config, std::size_t data_dim);

/// KL warm-up multiplier for update u: linear from 0 to 1 over the first
/// warmup_fraction of the run.
double warmup_weight(const TrainConfig& config, std::size_t update);

/// Runs updates state.update .. config.updates − 1. Every random draw is keyed
/// by (seed, update), so a resumed run replays the same stream. `on_row` sees
/// each row as it is produced; `on_checkpoint` fires every checkpoint_every
/// updates.
void train_run(TrainState& state, const Matrix& data, const std::function<void(const MetricsRow&)>& on_row = {},
               const std::function<void(const TrainState&)>& on_checkpoint = {});

/// AIS estimate of log Z for the current prior, keyed by (seed, update).
AisResult log_partition_snapshot(const TrainState& state);

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

/// CSV header: `# key=value` lines for the resolved config then the columns.
std::string metrics_header(const TrainConfig& config);
std::string metrics_line(const MetricsRow& row);

}  // namespace relaxbm
