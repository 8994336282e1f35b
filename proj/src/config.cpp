// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>
#include <string_view>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
  return out;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void TrainConfig::validate() const {
  model.smoothing.validate();
  sampler.validate();
  ais.validate();
  if (updates > 0 && batch_size == 0) throw ConfigError("batch must be positive");
  if (k == 0) throw ConfigError("k must be at least 1");
  if (!(adam.learning_rate >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) throw ConfigError("warmup must lie in [0,1]");
  if (model.groups == 0 || model.latent_dim() % model.groups != 0)
    throw ConfigError("d1 + d2 must be divisible by groups");
  if (model.mf_iterations < 1) throw ConfigError("mf-iterations must be at least 1");
}

KeyValues to_key_values(const TrainConfig& c) {
  KeyValues kv;
  kv["dataset"] = c.dataset.name;
  kv["data-dir"] = c.dataset.data_dir.string();
  kv["data-limit"] = std::to_string(c.dataset.limit);
  kv["synthetic-modes"] = std::to_string(c.dataset.synthetic.modes);
  kv["synthetic-dim"] = std::to_string(c.dataset.synthetic.dim);
  kv["synthetic-noise"] = format_real(c.dataset.synthetic.noise);
  kv["synthetic-n"] = std::to_string(c.dataset.synthetic.n);
  kv["d1"] = std::to_string(c.model.latent_first);
  kv["d2"] = std::to_string(c.model.latent_second);
  kv["groups"] = std::to_string(c.model.groups);
  kv["arch"] = std::string(arch_name(c.model.arch));
  kv["hidden"] = std::to_string(c.model.hidden);
  kv["smoothing"] = std::string(family_name(c.model.smoothing.family));
  kv["beta"] = format_real(c.model.smoothing.beta);
  kv["epsilon"] = format_real(c.model.smoothing.epsilon);
  kv["mf-iterations"] = std::to_string(c.model.mf_iterations);
  kv["sampler"] = std::string(sampler_name(c.sampler.kind));
  kv["chains"] = std::to_string(c.sampler.chains);
  kv["sweeps"] = std::to_string(c.sampler.sweeps_per_update);
  kv["pa-temperatures"] = std::to_string(c.sampler.pa_temperatures);
  kv["updates"] = std::to_string(c.updates);
  kv["batch"] = std::to_string(c.batch_size);
  kv["k"] = std::to_string(c.k);
  kv["lr"] = format_real(c.adam.learning_rate);
  kv["warmup"] = format_real(c.warmup_fraction);
  kv["ais-every"] = std::to_string(c.ais_every);
  kv["ais-temperatures"] = std::to_string(c.ais.num_temperatures);
  kv["ais-samples"] = std::to_string(c.ais.num_samples);
  kv["seed"] = std::to_string(c.seed);
  kv["checkpoint-every"] = std::to_string(c.checkpoint_every);
  return kv;
}

TrainConfig train_config_from_key_values(const KeyValues& kv) {
  TrainConfig c;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
      {"dataset", [&](auto&, auto& v) { c.dataset.name = v; }},
      {"data-dir", [&](auto&, auto& v) { c.dataset.data_dir = v; }},
      {"data-limit", [&](auto& k, auto& v) { c.dataset.limit = to_uint(k, v); }},
      {"synthetic-modes", [&](auto& k, auto& v) { c.dataset.synthetic.modes = to_uint(k, v); }},
      {"synthetic-dim", [&](auto& k, auto& v) { c.dataset.synthetic.dim = to_uint(k, v); }},
      {"synthetic-noise", [&](auto& k, auto& v) { c.dataset.synthetic.noise = to_real(k, v); }},
      {"synthetic-n", [&](auto& k, auto& v) { c.dataset.synthetic.n = to_uint(k, v); }},
      {"d1", [&](auto& k, auto& v) { c.model.latent_first = to_uint(k, v); }},
      {"d2", [&](auto& k, auto& v) { c.model.latent_second = to_uint(k, v); }},
      {"groups", [&](auto& k, auto& v) { c.model.groups = to_uint(k, v); }},
      {"arch", [&](auto&, auto& v) { c.model.arch = parse_arch(v); }},
      {"hidden", [&](auto& k, auto& v) { c.model.hidden = to_uint(k, v); }},
      {"smoothing", [&](auto&, auto& v) { c.model.smoothing.family = parse_family(v); }},
      {"beta", [&](auto& k, auto& v) { c.model.smoothing.beta = to_real(k, v); }},
      {"epsilon", [&](auto& k, auto& v) { c.model.smoothing.epsilon = to_real(k, v); }},
      {"mf-iterations", [&](auto& k, auto& v) { c.model.mf_iterations = static_cast<int>(to_uint(k, v)); }},
      {"sampler", [&](auto&, auto& v) { c.sampler.kind = parse_sampler(v); }},
      {"chains", [&](auto& k, auto& v) { c.sampler.chains = to_uint(k, v); }},
      {"sweeps", [&](auto& k, auto& v) { c.sampler.sweeps_per_update = to_uint(k, v); }},
      {"pa-temperatures", [&](auto& k, auto& v) { c.sampler.pa_temperatures = to_uint(k, v); }},
      {"updates", [&](auto& k, auto& v) { c.updates = to_uint(k, v); }},
      {"batch", [&](auto& k, auto& v) { c.batch_size = to_uint(k, v); }},
      {"k", [&](auto& k, auto& v) { c.k = to_uint(k, v); }},
      {"lr", [&](auto& k, auto& v) { c.adam.learning_rate = to_real(k, v); }},
      {"warmup", [&](auto& k, auto& v) { c.warmup_fraction = to_real(k, v); }},
      {"ais-every", [&](auto& k, auto& v) { c.ais_every = to_uint(k, v); }},
      {"ais-temperatures", [&](auto& k, auto& v) { c.ais.num_temperatures = to_uint(k, v); }},
      {"ais-samples", [&](auto& k, auto& v) { c.ais.num_samples = to_uint(k, v); }},
      {"seed", [&](auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"checkpoint-every", [&](auto& k, auto& v) { c.checkpoint_every = to_uint(k, v); }},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  c.dataset.seed = c.seed;
  return c;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace relaxbm
