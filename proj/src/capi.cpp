// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/relaxbm.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <new>
#include <sstream>
#include <string>

#include "relaxbm/config.hpp"
#include "relaxbm/data.hpp"
#include "relaxbm/diag.hpp"
#include "relaxbm/error.hpp"
#include "relaxbm/rbm.hpp"
#include "relaxbm/reparam.hpp"
#include "relaxbm/samplers.hpp"
#include "relaxbm/train.hpp"

struct relaxbm_config {
  relaxbm::KeyValues values;
};

struct relaxbm_rbm {
  relaxbm::Rbm rbm;
};

namespace {

thread_local std::string g_last_error;

class InvalidArgument : public relaxbm::Error {
 public:
  using Error::Error;
};

template <typename F>
relaxbm_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return RELAXBM_OK;
  } catch (const InvalidArgument& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_INVALID_ARGUMENT;
  } catch (const relaxbm::NotPositiveDefinite& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_NOT_POSITIVE_DEFINITE;
  } catch (const relaxbm::DimensionError& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_DIMENSION;
  } catch (const relaxbm::DomainError& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_DOMAIN;
  } catch (const relaxbm::TooLargeError& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_TOO_LARGE;
  } catch (const relaxbm::FormatError& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_FORMAT;
  } catch (const relaxbm::ConfigError& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_CONFIG;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RELAXBM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RELAXBM_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw InvalidArgument(std::string(what) + " must not be NULL");
}

void copy_out(const std::string& text, char* buffer, std::size_t capacity) {
  if (buffer == nullptr || capacity == 0) return;
  const std::size_t n = std::min(text.size(), capacity - 1);
  std::memcpy(buffer, text.data(), n);
  buffer[n] = '\0';
}

void write_text(const char* path, const std::string& text) {
  if (path == nullptr || *path == '\0') return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
  out << text;
  if (!out) throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

relaxbm::SmoothingKind kind_from(const char* family, double beta) {
  require(family, "family");
  relaxbm::SmoothingKind k;
  k.family = relaxbm::parse_family(family);
  k.beta = beta;
  k.validate();
  return k;
}

std::vector<double> betas_from(const double* betas, std::size_t n) {
  if (n == 0) throw InvalidArgument("at least one beta is required");
  require(betas, "betas");
  return {betas, betas + n};
}

std::string fmt(double v) { return relaxbm::format_real(v); }

}  // namespace

extern "C" {

const char* relaxbm_version(void) { return "1.0.0"; }

const char* relaxbm_status_name(relaxbm_status status) {
  switch (status) {
    case RELAXBM_OK: return "ok";
    case RELAXBM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RELAXBM_ERR_DIMENSION: return "dimension mismatch";
    case RELAXBM_ERR_DOMAIN: return "domain error";
    case RELAXBM_ERR_TOO_LARGE: return "problem too large";
    case RELAXBM_ERR_NOT_POSITIVE_DEFINITE: return "not positive definite";
    case RELAXBM_ERR_FORMAT: return "format error";
    case RELAXBM_ERR_CONFIG: return "configuration error";
    case RELAXBM_ERR_IO: return "i/o error";
    case RELAXBM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* relaxbm_last_error(void) { return g_last_error.c_str(); }

relaxbm_status relaxbm_config_create(relaxbm_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new relaxbm_config{};
  });
}

void relaxbm_config_destroy(relaxbm_config* config) { delete config; }

relaxbm_status relaxbm_config_set(relaxbm_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    relaxbm::KeyValues probe = config->values;
    probe[key] = value;
    (void)relaxbm::train_config_from_key_values(probe);
    config->values = std::move(probe);
  });
}

relaxbm_status relaxbm_config_load(relaxbm_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    std::ifstream in(path);
    if (!in) throw relaxbm::FormatError(std::string("cannot open config file ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    relaxbm::KeyValues merged = config->values;
    for (auto& [k, v] : relaxbm::parse_key_values(ss.str())) merged[k] = v;
    (void)relaxbm::train_config_from_key_values(merged);
    config->values = std::move(merged);
  });
}

relaxbm_status relaxbm_config_resolved(const relaxbm_config* config, char* buffer, size_t capacity) {
  return guarded([&] {
    require(config, "config");
    require(buffer, "buffer");
    copy_out(relaxbm::format_key_values(relaxbm::to_key_values(relaxbm::train_config_from_key_values(config->values))),
             buffer, capacity);
  });
}

relaxbm_status relaxbm_rbm_create(size_t d1, size_t d2, const double* biases, const double* cross,
                                  relaxbm_rbm** out) {
  return guarded([&] {
    require(biases, "biases");
    require(cross, "cross");
    require(out, "out");
    if (d1 == 0 || d2 == 0) throw relaxbm::DimensionError("both sides need at least one unit");
    const relaxbm::Vector a = Eigen::Map<const relaxbm::Vector>(biases, static_cast<Eigen::Index>(d1 + d2));
    const relaxbm::Matrix w =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            cross, static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d2));
    *out = new relaxbm_rbm{relaxbm::Rbm::bipartite(a, w)};
  });
}

relaxbm_status relaxbm_rbm_create_random(size_t d1, size_t d2, double bias_scale, double weight_scale, uint64_t seed,
                                         relaxbm_rbm** out) {
  return guarded([&] {
    require(out, "out");
    if (d1 == 0 || d2 == 0) throw relaxbm::DimensionError("both sides need at least one unit");
    *out = new relaxbm_rbm{relaxbm::diag_rbm(d1, d2, bias_scale, weight_scale, seed)};
  });
}

void relaxbm_rbm_destroy(relaxbm_rbm* rbm) { delete rbm; }

relaxbm_status relaxbm_rbm_dim(const relaxbm_rbm* rbm, size_t* out) {
  return guarded([&] {
    require(rbm, "rbm");
    require(out, "out");
    *out = rbm->rbm.dim();
  });
}

relaxbm_status relaxbm_rbm_energy(const relaxbm_rbm* rbm, const double* z, double* out) {
  return guarded([&] {
    require(rbm, "rbm");
    require(z, "z");
    require(out, "out");
    *out = relaxbm::energy(rbm->rbm, Eigen::Map<const relaxbm::Vector>(z, static_cast<Eigen::Index>(rbm->rbm.dim())));
  });
}

relaxbm_status relaxbm_rbm_log_partition(const relaxbm_rbm* rbm, double* out) {
  return guarded([&] {
    require(rbm, "rbm");
    require(out, "out");
    *out = relaxbm::exact_log_partition(rbm->rbm);
  });
}

relaxbm_status relaxbm_rbm_ais(const relaxbm_rbm* rbm, size_t temperatures, size_t samples, uint64_t seed,
                               double* log_z, double* std_error) {
  return guarded([&] {
    require(rbm, "rbm");
    require(log_z, "log_z");
    relaxbm::AisConfig cfg;
    cfg.num_temperatures = temperatures;
    cfg.num_samples = samples;
    relaxbm::Rng rng(seed, relaxbm::Stream::kAis, 0);
    const relaxbm::AisResult r = relaxbm::ais_log_partition(rbm->rbm, cfg, rng);
    *log_z = r.log_z;
    if (std_error) *std_error = r.std_error;
  });
}

relaxbm_status relaxbm_rbm_population_annealing(const relaxbm_rbm* rbm, size_t population, size_t temperatures,
                                                size_t sweeps, uint64_t seed, double* log_z) {
  return guarded([&] {
    require(rbm, "rbm");
    require(log_z, "log_z");
    relaxbm::SamplerConfig cfg;
    cfg.chains = population;
    cfg.pa_temperatures = temperatures;
    cfg.sweeps_per_update = sweeps;
    relaxbm::Rng rng(seed, relaxbm::Stream::kNegative, 0);
    *log_z = relaxbm::population_annealing_run(rbm->rbm, cfg, rng).log_z;
  });
}

relaxbm_status relaxbm_rbm_save(const relaxbm_rbm* rbm, const char* path) {
  return guarded([&] {
    require(rbm, "rbm");
    require(path, "path");
    relaxbm::KvContainer out;
    relaxbm::save_rbm(out, rbm->rbm);
    out.save(path);
  });
}

relaxbm_status relaxbm_rbm_load(const char* path, relaxbm_rbm** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new relaxbm_rbm{relaxbm::load_rbm(relaxbm::KvContainer::load(path))};
  });
}

relaxbm_status relaxbm_inverse_cdf(const char* family, double beta, double q, double rho, double* zeta) {
  return guarded([&] {
    require(zeta, "zeta");
    *zeta = relaxbm::sample_inverse_cdf(kind_from(family, beta), q, rho);
  });
}

relaxbm_status relaxbm_implicit_grads(const char* family, double beta, double q, double zeta, double* dzeta_dq,
                                      double* dzeta_dbeta) {
  return guarded([&] {
    require(dzeta_dq, "dzeta_dq");
    const relaxbm::ImplicitGrads g = relaxbm::implicit_grads(kind_from(family, beta), q, zeta);
    *dzeta_dq = g.dzeta_dq;
    if (dzeta_dbeta) *dzeta_dbeta = g.dzeta_dbeta;
  });
}

relaxbm_status relaxbm_train(const relaxbm_config* config, const char* resume_path, const char* checkpoint_path,
                             const char* metrics_path, char* summary, size_t capacity) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    if (config == nullptr && resume_path == nullptr) throw InvalidArgument("need a config or a checkpoint to resume");
    std::optional<relaxbm::TrainState> state;
    relaxbm::Dataset data;
    if (resume_path != nullptr) {
      state.emplace(relaxbm::load_checkpoint(resume_path));
      if (config != nullptr) {
        const auto it = config->values.find("updates");
        if (it != config->values.end()) {
          relaxbm::KeyValues kv = relaxbm::to_key_values(state->config);
          kv["updates"] = it->second;
          state->config.updates = relaxbm::train_config_from_key_values(kv).updates;
        }
      }
      data = relaxbm::load_dataset(state->config.dataset);
    } else {
      const relaxbm::TrainConfig cfg = relaxbm::train_config_from_key_values(config->values);
      data = relaxbm::load_dataset(cfg.dataset);
      state.emplace(relaxbm::init_train_state(cfg, static_cast<std::size_t>(data.train.cols())));
    }
    std::ofstream metrics;
    if (metrics_path != nullptr && *metrics_path != '\0') {
      const bool fresh = !std::filesystem::exists(metrics_path) || std::filesystem::file_size(metrics_path) == 0;
      metrics.open(metrics_path, std::ios::app);
      if (!metrics) throw std::filesystem::filesystem_error("cannot write", metrics_path,
                                                            std::make_error_code(std::errc::io_error));
      if (fresh) metrics << relaxbm::metrics_header(state->config);
    }
    const std::size_t first = state->update;
    double last_bound = 0.0;
    std::size_t skipped = 0;
    relaxbm::train_run(
        *state, data.train,
        [&](const relaxbm::MetricsRow& row) {
          last_bound = row.bound;
          if (row.skipped) ++skipped;
          if (metrics.is_open()) metrics << relaxbm::metrics_line(row) << std::flush;
        },
        [&](const relaxbm::TrainState& s) { relaxbm::save_checkpoint(s, checkpoint_path); });
    relaxbm::save_checkpoint(*state, checkpoint_path);
    std::ostringstream out;
    out << "updates " << first << ".." << state->update << ", train rows " << data.train.rows() << ", data_dim "
        << data.train.cols() << "\n";
    out << "final bound (unnormalized) " << fmt(last_bound) << ", skipped updates " << skipped << "\n";
    out << "log Z (AIS) " << fmt(state->log_z) << " +- " << fmt(state->log_z_std_error) << "\n";
    copy_out(out.str(), summary, capacity);
  });
}

relaxbm_status relaxbm_eval(const char* checkpoint_path, size_t k, size_t ais_temperatures, size_t ais_samples,
                            size_t limit, uint64_t seed, relaxbm_eval_result* out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    if (k == 0) throw InvalidArgument("k must be at least 1");
    const relaxbm::TrainState state = relaxbm::load_checkpoint(checkpoint_path);
    relaxbm::DatasetConfig dcfg = state.config.dataset;
    const relaxbm::Dataset data = relaxbm::load_dataset(dcfg);
    relaxbm::Matrix test = data.test;
    if (limit > 0 && static_cast<std::size_t>(test.rows()) > limit)
      test.conservativeResize(static_cast<Eigen::Index>(limit), Eigen::NoChange);
    relaxbm::AisConfig ais;
    ais.num_temperatures = ais_temperatures;
    ais.num_samples = ais_samples;
    const relaxbm::EvalResult r = relaxbm::evaluate_model(state.model, test, k, ais, seed);
    *out = {r.eval_ll, r.std_error, r.log_z, r.log_z_std_error, r.rows};
  });
}

relaxbm_status relaxbm_diag_gradvar(const char* kinds, double q, size_t samples, uint64_t seed, const char* csv_path,
                                    char* summary, size_t capacity) {
  return guarded([&] {
    std::vector<relaxbm::SmoothingKind> grid;
    if (kinds == nullptr || *kinds == '\0') {
      grid = relaxbm::default_gradvar_grid();
    } else {
      std::stringstream ss(kinds);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InvalidArgument("kind '" + item + "' is not family:beta");
        grid.push_back(kind_from(item.substr(0, colon).c_str(), std::stod(item.substr(colon + 1))));
      }
    }
    const auto rows = relaxbm::grad_variance_experiment(grid, q, samples, seed);
    write_text(csv_path, relaxbm::gradvar_csv(rows));
    std::ostringstream out;
    out << std::left << std::setw(8) << "kind" << std::setw(8) << "beta" << std::setw(16) << "mean|zeta-z|"
        << "Var[dzeta/dq]\n";
    for (const auto& r : rows)
      out << std::setw(8) << relaxbm::family_name(r.family) << std::setw(8) << r.beta << std::setw(16)
          << r.mean_abs_dist << r.grad_variance << "\n";
    copy_out(out.str(), summary, capacity);
  });
}

relaxbm_status relaxbm_diag_mfkl(size_t d1, size_t d2, double bias_scale, double weight_scale, const char* family,
                                 const double* betas, size_t n_betas, size_t n_zeta, int sweeps, uint64_t seed,
                                 const char* csv_path, char* summary, size_t capacity) {
  return guarded([&] {
    require(family, "family");
    const relaxbm::Rbm rbm = relaxbm::diag_rbm(d1, d2, bias_scale, weight_scale, seed);
    const std::vector<double> bs = betas_from(betas, n_betas);
    const auto rows = relaxbm::mf_kl_trace(rbm, relaxbm::parse_family(family), bs, n_zeta, sweeps, seed);
    write_text(csv_path, relaxbm::mfkl_csv(rows));
    std::ostringstream out;
    out << "median exact KL(m || p-hat) by sweep\nbeta";
    for (int s = 0; s <= sweeps; ++s) out << "\t" << s;
    out << "\n";
    for (double b : bs) {
      out << b;
      for (int s = 0; s <= sweeps; ++s) {
        std::vector<double> v;
        for (const auto& r : rows)
          if (r.beta == b && r.sweep == s) v.push_back(r.kl);
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        out << "\t" << std::setprecision(4) << v[v.size() / 2];
      }
      out << "\n";
    }
    copy_out(out.str(), summary, capacity);
  });
}

relaxbm_status relaxbm_diag_invcdf(const char* family, const double* betas, size_t n_betas, double q, size_t points,
                                   const char* csv_path, char* summary, size_t capacity) {
  return guarded([&] {
    require(family, "family");
    const std::vector<double> bs = betas_from(betas, n_betas);
    const auto rows = relaxbm::inverse_cdf_curves(relaxbm::parse_family(family), bs, q, points);
    write_text(csv_path, relaxbm::invcdf_csv(rows));
    std::ostringstream out;
    out << "beta\tzeta(rho=0.5)\tdzeta/dq(rho=0.5)\n";
    for (double b : bs) {
      const auto kind = kind_from(family, b);
      const double z = relaxbm::sample_inverse_cdf(kind, q, 0.5);
      out << b << "\t" << z << "\t" << relaxbm::implicit_grads(kind, q, z).dzeta_dq << "\n";
    }
    copy_out(out.str(), summary, capacity);
  });
}

relaxbm_status relaxbm_diag_pa_vs_pcd(const relaxbm_config* config, const size_t* ks, size_t n_ks, size_t eval_k,
                                      const char* csv_path, char* summary, size_t capacity) {
  return guarded([&] {
    require(config, "config");
    if (n_ks == 0) throw InvalidArgument("at least one K is required");
    require(ks, "ks");
    const relaxbm::TrainConfig cfg = relaxbm::train_config_from_key_values(config->values);
    const relaxbm::Dataset data = relaxbm::load_dataset(cfg.dataset);
    const auto rows = relaxbm::pa_vs_pcd_report(cfg, data, {ks, ks + n_ks}, eval_k);
    write_text(csv_path, relaxbm::pa_vs_pcd_csv(rows));
    std::ostringstream out;
    out << "K\tPCD\t\tPA\n";
    for (std::size_t i = 0; i < n_ks; ++i) {
      const auto& pcd = rows[i];
      const auto& pa = rows[n_ks + i];
      out << ks[i] << "\t" << std::fixed << std::setprecision(3) << pcd.eval_ll << "\t" << pa.eval_ll << "\n";
    }
    copy_out(out.str(), summary, capacity);
  });
}

}  // extern "C"
