// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "relaxbm/container.hpp"
#include "relaxbm/error.hpp"
#include "relaxbm/numeric.hpp"
#include "relaxbm/rng.hpp"

namespace relaxbm {
namespace {

TEST(Numeric, SoftplusIsStableAtExtremes) {
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
  EXPECT_EQ(softplus(-800.0), 0.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus(-30.0), std::exp(-30.0), 1e-25);
}

TEST(Numeric, SigmoidAndLogSigmoid) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-12);
  EXPECT_NEAR(std::exp(log_sigmoid(1.3)), sigmoid(1.3), 1e-15);
}

TEST(Numeric, LogSumExp) {
  const std::vector<double> v{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_mean_exp(v), 1000.0, 1e-12);
  const std::vector<double> empty;
  EXPECT_EQ(log_sum_exp(empty), -INFINITY);
  const std::vector<double> with_neg_inf{-INFINITY, 0.0};
  EXPECT_NEAR(log_sum_exp(with_neg_inf), 0.0, 1e-15);
  EXPECT_NEAR(log_sum_exp(-INFINITY, 2.0), 2.0, 1e-15);
}

TEST(Numeric, StreamingLogSumExpMatchesBatch) {
  Rng rng(5);
  std::vector<double> v;
  LogSumExp acc;
  for (int i = 0; i < 1000; ++i) {
    v.push_back(50.0 * rng.normal());
    acc.add(v.back());
  }
  EXPECT_NEAR(acc.value(), log_sum_exp(v), 1e-10);
}

TEST(Numeric, BernoulliEntropyFromLogit) {
  EXPECT_NEAR(bernoulli_entropy_from_logit(0.0), std::log(2.0), 1e-15);
  EXPECT_GE(bernoulli_entropy_from_logit(800.0), 0.0);
  EXPECT_LT(bernoulli_entropy_from_logit(800.0), 1e-300);
  const double p = sigmoid(0.7);
  EXPECT_NEAR(bernoulli_entropy_from_logit(0.7), -p * std::log(p) - (1 - p) * std::log(1 - p), 1e-15);
}

TEST(Rng, DeterministicAndStreamSeparated) {
  Rng a(42, Stream::kUpdate, 3), b(42, Stream::kUpdate, 3), c(42, Stream::kUpdate, 4), d(42, Stream::kData, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
    EXPECT_NE(x, d.next());
  }
}

TEST(Rng, RawStateResumesStream) {
  Rng a(7);
  for (int i = 0; i < 10; ++i) a.next();
  Rng b(a.key(), a.counter(), true);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, UniformMomentsAndRange) {
  Rng rng(1);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double o = rng.uniform_open();
    ASSERT_GT(o, 0.0);
    ASSERT_LT(o, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum_sq / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sum_sq / n, 1.0, 0.02);
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4.0 * std::sqrt(n / 7.0));
}

class ContainerTest : public ::testing::Test {
 protected:
  std::filesystem::path path_ = std::filesystem::temp_directory_path() / "relaxbm_container_test.bin";
  void TearDown() override { std::filesystem::remove(path_); }
};

TEST_F(ContainerTest, RoundTripAllTypes) {
  KvContainer c;
  c.put("n", std::int64_t{-5});
  c.put("ints", std::vector<std::int64_t>{1, 2, 3});
  const std::vector<double> reals{0.1, -2.5, 1e300, -0.0};
  c.put("reals", reals);
  c.put("text", "hello");
  c.save(path_);
  const KvContainer back = KvContainer::load(path_);
  EXPECT_EQ(back.get_int("n"), -5);
  EXPECT_EQ(back.get_ints("ints"), (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_EQ(back.get_reals("reals"), reals);
  EXPECT_EQ(back.get_string("text"), "hello");
  EXPECT_EQ(back.serialize(), c.serialize());
}

TEST_F(ContainerTest, DetectsCorruption) {
  KvContainer c;
  c.put("x", std::int64_t{1});
  auto bytes = c.serialize();
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  EXPECT_THROW(KvContainer::deserialize(flipped), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(KvContainer::deserialize(bad_magic), FormatError);
  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + 10);
  EXPECT_THROW(KvContainer::deserialize(truncated), FormatError);
}

TEST_F(ContainerTest, MissingKeyAndWrongType) {
  KvContainer c;
  c.put("x", std::int64_t{1});
  EXPECT_THROW(c.get_int("y"), FormatError);
  EXPECT_THROW(c.get_reals("x"), FormatError);
}

TEST(Fnv, KnownVectors) {
  // FNV-1a 64 reference values.
  const std::vector<std::uint8_t> empty;
  EXPECT_EQ(fnv1a64(empty), 0xcbf29ce484222325ULL);
  const std::vector<std::uint8_t> a{'a'};
  EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cULL);
  const std::vector<std::uint8_t> foobar{'f', 'o', 'o', 'b', 'a', 'r'};
  EXPECT_EQ(fnv1a64(foobar), 0x85944171f73967e8ULL);
}

}  // namespace
}  // namespace relaxbm
