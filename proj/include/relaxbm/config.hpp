// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "relaxbm/data.hpp"
#include "relaxbm/model.hpp"
#include "relaxbm/samplers.hpp"

namespace relaxbm {

using KeyValues = std::map<std::string, std::string>;

/// Everything a training run depends on. Keys of to_key_values() match the
/// CLI flag names without the leading dashes.
struct TrainConfig {
  ModelConfig model;  // data_dim is filled in from the dataset
  DatasetConfig dataset;
  SamplerConfig sampler;
  std::size_t updates = 2000;
  std::size_t batch_size = 20;
  std::size_t k = 5;
  AdamConfig adam;
  double warmup_fraction = 0.3;
  std::size_t ais_every = 0;  // 0: only the final snapshot
  AisConfig ais{1000, 100, {}, 200};
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;

  void validate() const;
};

KeyValues to_key_values(const TrainConfig& config);
/// Unknown keys raise ConfigError; missing keys keep their defaults.
TrainConfig train_config_from_key_values(const KeyValues& kv);

/// `key = value` lines; blank lines and lines starting with '#' or ';' are
/// skipped, as are [section] headers.
KeyValues parse_key_values(const std::string& text);
std::string format_key_values(const KeyValues& kv);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double value);

}  // namespace relaxbm
