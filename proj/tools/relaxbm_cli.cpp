// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
//
// relaxbm command line. Exit codes: 0 success, 1 runtime failure, 2 usage.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relaxbm/relaxbm.h"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;
constexpr std::size_t kSummaryCapacity = 1 << 16;

// Training keys exposed as --<key> flags; names match the config file keys.
const std::vector<std::pair<std::string, std::string>> kTrainKeys = {
    {"dataset", "synthetic or mnist"},
    {"data-dir", "directory with MNIST files (else RELAXBM_DATA_DIR)"},
    {"data-limit", "keep only the first N rows of each split (0 keeps all)"},
    {"synthetic-modes", "number of synthetic prototypes"},
    {"synthetic-dim", "synthetic data dimension"},
    {"synthetic-noise", "synthetic bit-flip probability"},
    {"synthetic-n", "synthetic training points"},
    {"d1", "RBM units on side one"},
    {"d2", "RBM units on side two"},
    {"groups", "posterior groups"},
    {"arch", "linear or mlp"},
    {"hidden", "hidden units per layer (mlp)"},
    {"smoothing", "exp, unexp, power, gauss or git"},
    {"beta", "inverse temperature"},
    {"epsilon", "uniform mixing weight (unexp)"},
    {"mf-iterations", "mean-field sweeps"},
    {"sampler", "pa or pcd"},
    {"chains", "PA population or PCD chain count"},
    {"sweeps", "Gibbs sweeps per update"},
    {"pa-temperatures", "PA temperature count"},
    {"updates", "parameter updates"},
    {"batch", "minibatch size"},
    {"k", "importance samples"},
    {"lr", "Adam learning rate"},
    {"warmup", "fraction of updates with KL warm-up"},
    {"ais-every", "AIS snapshot period in updates (0: final only)"},
    {"ais-temperatures", "AIS temperatures for snapshots"},
    {"ais-samples", "AIS samples for snapshots"},
    {"checkpoint-every", "checkpoint period in updates (0: final only)"},
};

struct ConfigDeleter {
  void operator()(relaxbm_config* c) const { relaxbm_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<relaxbm_config, ConfigDeleter>;

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(relaxbm_status status) {
  if (status != RELAXBM_OK) throw Failure(std::string(relaxbm_status_name(status)) + ": " + relaxbm_last_error());
}

struct TrainFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::optional<std::uint64_t> seed;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--config", flags.config_file, "key = value file; flags override it")->check(CLI::ExistingFile);
  for (const auto& [key, help] : kTrainKeys) cmd->add_option("--" + key, flags.values[key], help);
  cmd->add_option("--seed", flags.seed, "random seed (required here or in the config file)");
}

ConfigPtr build_config(CLI::App* cmd, const TrainFlags& flags, bool require_seed) {
  relaxbm_config* raw = nullptr;
  check(relaxbm_config_create(&raw));
  ConfigPtr config(raw);
  bool seeded = false;
  if (!flags.config_file.empty()) {
    check(relaxbm_config_load(config.get(), flags.config_file.c_str()));
    std::ifstream in(flags.config_file);
    std::string line;
    while (std::getline(in, line)) {
      const auto start = line.find_first_not_of(" \t");
      if (start == std::string::npos || line.compare(start, 4, "seed") != 0) continue;
      const auto eq = line.find_first_not_of(" \t", start + 4);
      if (eq != std::string::npos && line[eq] == '=') seeded = true;
    }
  }
  for (const auto& [key, value] : flags.values)
    if (cmd->count("--" + key) > 0) check(relaxbm_config_set(config.get(), key.c_str(), value.c_str()));
  if (flags.seed) {
    check(relaxbm_config_set(config.get(), "seed", std::to_string(*flags.seed).c_str()));
    seeded = true;
  }
  if (require_seed && !seeded) throw CLI::RequiredError("--seed");
  return config;
}

std::vector<double> parse_reals(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relaxbm: relaxed Boltzmann machine priors for discrete VAEs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", relaxbm_version());

  // train
  auto* train = app.add_subcommand("train", "train a model; writes a checkpoint and a metrics CSV");
  TrainFlags train_flags;
  std::string train_checkpoint = "relaxbm.ckpt", train_metrics = "metrics.csv", resume;
  add_train_flags(train, train_flags);
  train->add_option("--checkpoint", train_checkpoint, "output checkpoint path");
  train->add_option("--metrics", train_metrics, "metrics CSV path (rows are appended)");
  train->add_option("--resume", resume, "continue from this checkpoint")->check(CLI::ExistingFile);

  // eval
  auto* eval = app.add_subcommand("eval", "discrete importance-weighted bound with AIS log Z");
  std::string eval_checkpoint;
  std::size_t eval_k = 4000, eval_ais_t = 10000, eval_ais_n = 1000, eval_limit = 0;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint to evaluate")->required()->check(CLI::ExistingFile);
  eval->add_option("--k", eval_k, "importance samples per test point")->capture_default_str();
  eval->add_option("--ais-temperatures", eval_ais_t, "AIS temperatures")->capture_default_str();
  eval->add_option("--ais-samples", eval_ais_n, "AIS samples")->capture_default_str();
  eval->add_option("--limit", eval_limit, "evaluate only the first N test rows (0: all)")->capture_default_str();
  eval->add_option("--seed", eval_seed, "random seed")->required();

  // diag-gradvar
  auto* gradvar = app.add_subcommand("diag-gradvar", "Var[dzeta/dq] against mean |zeta - z| per smoothing");
  std::string gv_kinds, gv_out = "gradvar.csv";
  double gv_q = 0.5;
  std::size_t gv_samples = 1000000;
  std::uint64_t gv_seed = 0;
  gradvar->add_option("--kinds", gv_kinds, "family:beta list, e.g. exp:10,power:30 (default: both grids)");
  gradvar->add_option("--q", gv_q, "mixture weight")->capture_default_str();
  gradvar->add_option("--samples", gv_samples, "draws per kind (>= 10000)")->capture_default_str();
  gradvar->add_option("--seed", gv_seed, "random seed")->required();
  gradvar->add_option("--out", gv_out, "CSV path")->capture_default_str();

  // diag-mfkl
  auto* mfkl = app.add_subcommand("diag-mfkl", "exact mean-field KL per sweep on a random RBM");
  std::size_t mf_d1 = 8, mf_d2 = 8, mf_nzeta = 50;
  double mf_bias = 0.5, mf_weight = 1.0;
  int mf_sweeps = 5;
  std::string mf_family = "power", mf_betas = "15,20,30,40", mf_out = "mfkl.csv";
  std::uint64_t mf_seed = 0;
  mfkl->add_option("--d1", mf_d1, "RBM side one")->capture_default_str();
  mfkl->add_option("--d2", mf_d2, "RBM side two")->capture_default_str();
  mfkl->add_option("--bias-scale", mf_bias, "bias standard deviation")->capture_default_str();
  mfkl->add_option("--weight-scale", mf_weight, "coupling standard deviation")->capture_default_str();
  mfkl->add_option("--smoothing", mf_family, "smoothing family")->capture_default_str();
  mfkl->add_option("--betas", mf_betas, "comma-separated betas")->capture_default_str();
  mfkl->add_option("--n-zeta", mf_nzeta, "zeta draws")->capture_default_str();
  mfkl->add_option("--sweeps", mf_sweeps, "mean-field sweeps")->capture_default_str();
  mfkl->add_option("--seed", mf_seed, "random seed")->required();
  mfkl->add_option("--out", mf_out, "CSV path")->capture_default_str();

  // diag-invcdf
  auto* invcdf = app.add_subcommand("diag-invcdf", "zeta(rho) and dzeta/dq(rho) curves");
  std::string ic_family = "power", ic_betas = "10,20,40", ic_out = "invcdf.csv";
  double ic_q = 0.5;
  std::size_t ic_points = 201;
  invcdf->add_option("--smoothing", ic_family, "smoothing family")->capture_default_str();
  invcdf->add_option("--betas", ic_betas, "comma-separated betas")->capture_default_str();
  invcdf->add_option("--q", ic_q, "mixture weight")->capture_default_str();
  invcdf->add_option("--points", ic_points, "rho grid size")->capture_default_str();
  invcdf->add_option("--out", ic_out, "CSV path")->capture_default_str();

  // diag-pa-vs-pcd
  auto* pavs = app.add_subcommand("diag-pa-vs-pcd", "twin runs differing only in the negative-phase sampler");
  TrainFlags pv_flags;
  std::string pv_ks = "1,5,25", pv_out = "pa_vs_pcd.csv";
  std::size_t pv_eval_k = 1000;
  add_train_flags(pavs, pv_flags);
  pavs->add_option("--ks", pv_ks, "training K values")->capture_default_str();
  pavs->add_option("--eval-k", pv_eval_k, "discrete evaluation samples")->capture_default_str();
  pavs->add_option("--out", pv_out, "CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::string summary(kSummaryCapacity, '\0');
  auto print_summary = [&] { std::cout << summary.c_str(); };
  try {
    if (*train) {
      ConfigPtr config = build_config(train, train_flags, resume.empty());
      check(relaxbm_train(config.get(), resume.empty() ? nullptr : resume.c_str(), train_checkpoint.c_str(),
                          train_metrics.c_str(), summary.data(), summary.size()));
      print_summary();
      std::cout << "checkpoint " << train_checkpoint << ", metrics " << train_metrics << "\n";
    } else if (*eval) {
      relaxbm_eval_result r{};
      check(relaxbm_eval(eval_checkpoint.c_str(), eval_k, eval_ais_t, eval_ais_n, eval_limit, eval_seed, &r));
      std::printf("discrete IW bound (K=%zu, %zu test rows): %.6f +- %.6f\n", eval_k, r.rows, r.eval_ll, r.std_error);
      std::printf("log Z (AIS, %zu temperatures x %zu samples): %.6f +- %.6f\n", eval_ais_t, eval_ais_n, r.log_z,
                  r.log_z_std_error);
    } else if (*gradvar) {
      check(relaxbm_diag_gradvar(gv_kinds.c_str(), gv_q, gv_samples, gv_seed, gv_out.c_str(), summary.data(),
                                 summary.size()));
      print_summary();
      std::cout << "wrote " << gv_out << "\n";
    } else if (*mfkl) {
      const std::vector<double> betas = parse_reals(mf_betas);
      check(relaxbm_diag_mfkl(mf_d1, mf_d2, mf_bias, mf_weight, mf_family.c_str(), betas.data(), betas.size(),
                              mf_nzeta, mf_sweeps, mf_seed, mf_out.c_str(), summary.data(), summary.size()));
      print_summary();
      std::cout << "wrote " << mf_out << "\n";
    } else if (*invcdf) {
      const std::vector<double> betas = parse_reals(ic_betas);
      check(relaxbm_diag_invcdf(ic_family.c_str(), betas.data(), betas.size(), ic_q, ic_points, ic_out.c_str(),
                                summary.data(), summary.size()));
      print_summary();
      std::cout << "wrote " << ic_out << "\n";
    } else if (*pavs) {
      ConfigPtr config = build_config(pavs, pv_flags, true);
      std::vector<std::size_t> ks;
      for (double k : parse_reals(pv_ks)) ks.push_back(static_cast<std::size_t>(k));
      check(relaxbm_diag_pa_vs_pcd(config.get(), ks.data(), ks.size(), pv_eval_k, pv_out.c_str(), summary.data(),
                                   summary.size()));
      print_summary();
      std::cout << "wrote " << pv_out << "\n";
    }
  } catch (const CLI::RequiredError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad number in list: " << e.what() << "\n";
    return kUsage;
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return 0;
}
