// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "relaxbm/relaxbm.h"

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("relaxbm_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Config {
  relaxbm_config* c = nullptr;
  Config() { EXPECT_EQ(relaxbm_config_create(&c), RELAXBM_OK); }
  ~Config() { relaxbm_config_destroy(c); }
  void set(const char* k, const char* v) { ASSERT_EQ(relaxbm_config_set(c, k, v), RELAXBM_OK) << relaxbm_last_error(); }
};

void tiny(Config& cfg) {
  cfg.set("synthetic-modes", "2");
  cfg.set("synthetic-dim", "8");
  cfg.set("synthetic-n", "40");
  cfg.set("d1", "4");
  cfg.set("d2", "4");
  cfg.set("groups", "1");
  cfg.set("chains", "20");
  cfg.set("sweeps", "2");
  cfg.set("pa-temperatures", "3");
  cfg.set("updates", "6");
  cfg.set("batch", "8");
  cfg.set("ais-every", "0");
  cfg.set("ais-temperatures", "50");
  cfg.set("ais-samples", "10");
  cfg.set("seed", "5");
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(relaxbm_version(), "1.0.0");
  EXPECT_STREQ(relaxbm_status_name(RELAXBM_OK), "ok");
  EXPECT_STREQ(relaxbm_status_name(RELAXBM_ERR_TOO_LARGE), "problem too large");
  EXPECT_STREQ(relaxbm_status_name(static_cast<relaxbm_status>(99)), "unknown status");
}

TEST(CApi, ConfigSetAndResolve) {
  Config cfg;
  cfg.set("beta", "25");
  char buf[4096];
  ASSERT_EQ(relaxbm_config_resolved(cfg.c, buf, sizeof buf), RELAXBM_OK);
  const std::string text = buf;
  EXPECT_NE(text.find("beta = 25"), std::string::npos) << text;
  EXPECT_NE(text.find("dataset = synthetic"), std::string::npos);

  EXPECT_EQ(relaxbm_config_set(cfg.c, "nonsense", "1"), RELAXBM_ERR_CONFIG);
  EXPECT_NE(std::string(relaxbm_last_error()).find("nonsense"), std::string::npos);
  EXPECT_EQ(relaxbm_config_set(cfg.c, "updates", "many"), RELAXBM_ERR_CONFIG);
  // A rejected key leaves the config unchanged.
  ASSERT_EQ(relaxbm_config_resolved(cfg.c, buf, sizeof buf), RELAXBM_OK);
  EXPECT_EQ(std::string(buf), text);
  EXPECT_STREQ(relaxbm_last_error(), "");

  char small[8];
  ASSERT_EQ(relaxbm_config_resolved(cfg.c, small, sizeof small), RELAXBM_OK);
  EXPECT_EQ(std::string(small).size(), 7u);
  EXPECT_EQ(relaxbm_config_set(nullptr, "beta", "1"), RELAXBM_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ConfigLoad) {
  const fs::path p = scratch("cfg.ini");
  std::ofstream(p) << "# comment\nbeta = 12\nsampler = pcd\n";
  Config cfg;
  ASSERT_EQ(relaxbm_config_load(cfg.c, p.c_str()), RELAXBM_OK) << relaxbm_last_error();
  char buf[4096];
  ASSERT_EQ(relaxbm_config_resolved(cfg.c, buf, sizeof buf), RELAXBM_OK);
  EXPECT_NE(std::string(buf).find("beta = 12"), std::string::npos);
  EXPECT_NE(std::string(buf).find("sampler = pcd"), std::string::npos);
  EXPECT_EQ(relaxbm_config_load(cfg.c, scratch("absent.ini").c_str()), RELAXBM_ERR_FORMAT);
  std::ofstream(p) << "beta 12\n";
  EXPECT_EQ(relaxbm_config_load(cfg.c, p.c_str()), RELAXBM_ERR_CONFIG);
}

TEST(CApi, RbmEnergyAndPartition) {
  const double biases[3] = {0.5, -1.0, 0.25};
  const double cross[2] = {1.0, -2.0};  // d1 = 2, d2 = 1
  relaxbm_rbm* rbm = nullptr;
  ASSERT_EQ(relaxbm_rbm_create(2, 1, biases, cross, &rbm), RELAXBM_OK);
  size_t d = 0;
  ASSERT_EQ(relaxbm_rbm_dim(rbm, &d), RELAXBM_OK);
  EXPECT_EQ(d, 3u);
  const double z[3] = {1, 1, 1};
  double e = 0;
  ASSERT_EQ(relaxbm_rbm_energy(rbm, z, &e), RELAXBM_OK);
  EXPECT_DOUBLE_EQ(e, -(0.5 - 1.0 + 0.25) - (1.0 - 2.0));
  // Enumerate the eight states by hand.
  double s = 0;
  for (int c = 0; c < 8; ++c) {
    const double x[3] = {double(c & 1), double(c >> 1 & 1), double(c >> 2 & 1)};
    double ex;
    relaxbm_rbm_energy(rbm, x, &ex);
    s += std::exp(-ex);
  }
  double log_z = 0;
  ASSERT_EQ(relaxbm_rbm_log_partition(rbm, &log_z), RELAXBM_OK);
  EXPECT_NEAR(log_z, std::log(s), 1e-12);

  double ais = 0, se = -1;
  ASSERT_EQ(relaxbm_rbm_ais(rbm, 200, 200, 1, &ais, &se), RELAXBM_OK);
  EXPECT_NEAR(ais, log_z, 0.05);
  EXPECT_GE(se, 0.0);
  double pa = 0;
  ASSERT_EQ(relaxbm_rbm_population_annealing(rbm, 1000, 20, 1, 2, &pa), RELAXBM_OK);
  EXPECT_NEAR(pa, log_z, 0.1);

  const fs::path p = scratch("rbm.bin");
  ASSERT_EQ(relaxbm_rbm_save(rbm, p.c_str()), RELAXBM_OK);
  relaxbm_rbm* back = nullptr;
  ASSERT_EQ(relaxbm_rbm_load(p.c_str(), &back), RELAXBM_OK);
  double e2 = 0;
  relaxbm_rbm_energy(back, z, &e2);
  EXPECT_EQ(e, e2);
  relaxbm_rbm_destroy(back);
  relaxbm_rbm_destroy(rbm);

  EXPECT_EQ(relaxbm_rbm_create(0, 1, biases, cross, &rbm), RELAXBM_ERR_DIMENSION);
  EXPECT_EQ(relaxbm_rbm_load(scratch("absent.bin").c_str(), &rbm), RELAXBM_ERR_FORMAT);
  EXPECT_EQ(relaxbm_rbm_energy(nullptr, z, &e), RELAXBM_ERR_INVALID_ARGUMENT);
}

TEST(CApi, RandomRbmTooLarge) {
  relaxbm_rbm* rbm = nullptr;
  ASSERT_EQ(relaxbm_rbm_create_random(30, 30, 0.1, 0.1, 1, &rbm), RELAXBM_OK);
  double log_z;
  EXPECT_EQ(relaxbm_rbm_log_partition(rbm, &log_z), RELAXBM_ERR_TOO_LARGE);
  EXPECT_NE(std::string(relaxbm_last_error()), "");
  relaxbm_rbm_destroy(rbm);
}

TEST(CApi, InverseCdfAndGradients) {
  double zeta = 0;
  ASSERT_EQ(relaxbm_inverse_cdf("power", 30, 0.5, 0.5, &zeta), RELAXBM_OK);
  EXPECT_NEAR(zeta, 0.5, 1e-12);
  ASSERT_EQ(relaxbm_inverse_cdf("exp", 10, 0.3, 0.9, &zeta), RELAXBM_OK);
  double dq = 0, db = 0;
  ASSERT_EQ(relaxbm_implicit_grads("exp", 10, 0.3, zeta, &dq, &db), RELAXBM_OK);
  double zp, zm;
  relaxbm_inverse_cdf("exp", 10, 0.3 + 1e-6, 0.9, &zp);
  relaxbm_inverse_cdf("exp", 10, 0.3 - 1e-6, 0.9, &zm);
  EXPECT_NEAR(dq, (zp - zm) / 2e-6, 1e-5);
  EXPECT_EQ(relaxbm_inverse_cdf("cauchy", 10, 0.3, 0.9, &zeta), RELAXBM_ERR_DOMAIN);
  EXPECT_EQ(relaxbm_inverse_cdf("power", -1, 0.3, 0.9, &zeta), RELAXBM_ERR_DOMAIN);
  EXPECT_EQ(relaxbm_inverse_cdf("power", 10, 0.3, 0.9, nullptr), RELAXBM_ERR_INVALID_ARGUMENT);
}

TEST(CApi, TrainResumeEval) {
  Config cfg;
  tiny(cfg);
  const fs::path ck = scratch("train.ckpt"), metrics = scratch("train.csv");
  fs::remove(metrics);
  char summary[1024];
  ASSERT_EQ(relaxbm_train(cfg.c, nullptr, ck.c_str(), metrics.c_str(), summary, sizeof summary), RELAXBM_OK)
      << relaxbm_last_error();
  EXPECT_NE(std::string(summary).find("updates 0..6"), std::string::npos) << summary;

  Config more;
  more.set("updates", "9");
  ASSERT_EQ(relaxbm_train(more.c, ck.c_str(), ck.c_str(), metrics.c_str(), summary, sizeof summary), RELAXBM_OK)
      << relaxbm_last_error();
  EXPECT_NE(std::string(summary).find("updates 6..9"), std::string::npos) << summary;
  const std::string m = slurp(metrics);
  EXPECT_NE(m.find("# seed=5\n"), std::string::npos);
  std::size_t data_lines = 0;
  std::istringstream lines(m);
  for (std::string line; std::getline(lines, line);)
    if (!line.empty() && line[0] != '#' && line.find("update") != 0) ++data_lines;
  EXPECT_EQ(data_lines, 9u);

  relaxbm_eval_result r{};
  ASSERT_EQ(relaxbm_eval(ck.c_str(), 5, 100, 20, 4, 1, &r), RELAXBM_OK) << relaxbm_last_error();
  EXPECT_EQ(r.rows, 4u);
  EXPECT_TRUE(std::isfinite(r.eval_ll));
  EXPECT_LT(r.eval_ll, 0.0);
  EXPECT_EQ(relaxbm_eval(ck.c_str(), 0, 100, 20, 4, 1, &r), RELAXBM_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(relaxbm_train(nullptr, nullptr, ck.c_str(), nullptr, nullptr, 0), RELAXBM_ERR_INVALID_ARGUMENT);

  std::ofstream(scratch("bad.ckpt")) << "not a checkpoint";
  EXPECT_EQ(relaxbm_eval(scratch("bad.ckpt").c_str(), 5, 10, 10, 0, 1, &r), RELAXBM_ERR_FORMAT);
}

TEST(CApi, Diagnostics) {
  char summary[4096];
  const fs::path gv = scratch("gv.csv");
  ASSERT_EQ(relaxbm_diag_gradvar("exp:10,power:30", 0.5, 10000, 1, gv.c_str(), summary, sizeof summary),
            RELAXBM_OK);
  EXPECT_EQ(slurp(gv).find("kind,beta,mean_abs_dist,grad_variance"), 0u);
  EXPECT_EQ(relaxbm_diag_gradvar("exp10", 0.5, 10000, 1, nullptr, nullptr, 0), RELAXBM_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(relaxbm_diag_gradvar("exp:10", 0.5, 10, 1, nullptr, nullptr, 0), RELAXBM_ERR_DOMAIN);

  const double betas[2] = {15, 30};
  const fs::path mf = scratch("mf.csv");
  ASSERT_EQ(relaxbm_diag_mfkl(4, 4, 0.5, 1.0, "power", betas, 2, 3, 2, 1, mf.c_str(), summary, sizeof summary),
            RELAXBM_OK);
  EXPECT_EQ(slurp(mf).find("beta,zeta_index,sweep,kl\n"), 0u);
  EXPECT_NE(std::string(summary).find("median"), std::string::npos);
  EXPECT_EQ(relaxbm_diag_mfkl(15, 15, 0.5, 1.0, "power", betas, 2, 1, 1, 1, nullptr, nullptr, 0),
            RELAXBM_ERR_TOO_LARGE);
  EXPECT_EQ(relaxbm_diag_mfkl(4, 4, 0.5, 1.0, "power", betas, 0, 1, 1, 1, nullptr, nullptr, 0),
            RELAXBM_ERR_INVALID_ARGUMENT);

  const fs::path ic = scratch("ic.csv");
  ASSERT_EQ(relaxbm_diag_invcdf("power", betas, 2, 0.5, 11, ic.c_str(), summary, sizeof summary), RELAXBM_OK);
  EXPECT_EQ(slurp(ic).find("beta,rho,zeta,dzeta_dq\n"), 0u);

  Config cfg;
  tiny(cfg);
  const size_t ks[2] = {1, 5};
  const fs::path pp = scratch("pp.csv");
  ASSERT_EQ(relaxbm_diag_pa_vs_pcd(cfg.c, ks, 2, 10, pp.c_str(), summary, sizeof summary), RELAXBM_OK)
      << relaxbm_last_error();
  const std::string csv = slurp(pp);
  EXPECT_EQ(csv.find("sampler,k,eval_ll"), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(relaxbm_diag_pa_vs_pcd(cfg.c, ks, 0, 10, nullptr, nullptr, 0), RELAXBM_ERR_INVALID_ARGUMENT);
}

}  // namespace
