// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "relaxbm/data.hpp"
#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "relaxbm_test_data";
  fs::create_directories(dir);
  return dir / name;
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Two 4×4 images: a ramp and its reverse.
std::vector<std::uint8_t> fixture_bytes() {
  std::vector<std::uint8_t> b;
  put_be32(b, 0x00000803);
  put_be32(b, 2);
  put_be32(b, 4);
  put_be32(b, 4);
  for (int i = 0; i < 16; ++i) b.push_back(static_cast<std::uint8_t>(i * 17));
  for (int i = 0; i < 16; ++i) b.push_back(static_cast<std::uint8_t>(255 - i * 17));
  return b;
}

TEST(Idx, FixturePixelsRoundTrip) {
  const fs::path p = temp_path("fixture-idx3-ubyte");
  write_bytes(p, fixture_bytes());
  const Matrix img = load_idx_images(p);
  ASSERT_EQ(img.rows(), 2);
  ASSERT_EQ(img.cols(), 16);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(img(0, i), (i * 17) / 255.0);
    EXPECT_EQ(img(1, i), (255 - i * 17) / 255.0);
  }
  const fs::path q = temp_path("rewritten-idx3-ubyte");
  write_idx_images(q, img, 4, 4);
  std::ifstream in(q, std::ios::binary);
  const std::vector<std::uint8_t> back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(back, fixture_bytes());
  EXPECT_EQ(load_idx_images(q), img);
}

TEST(Idx, Labels) {
  std::vector<std::uint8_t> b;
  put_be32(b, 0x00000801);
  put_be32(b, 3);
  b.insert(b.end(), {7, 0, 9});
  const fs::path p = temp_path("labels-idx1-ubyte");
  write_bytes(p, b);
  EXPECT_EQ(load_idx_labels(p), (std::vector<std::uint8_t>{7, 0, 9}));
}

TEST(Idx, WrongMagicNamesBoth) {
  auto b = fixture_bytes();
  b[3] = 0x01;
  const fs::path p = temp_path("bad-magic");
  write_bytes(p, b);
  try {
    load_idx_images(p);
    FAIL() << "expected IdxError";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.expected(), 0x803u);
    EXPECT_EQ(e.found(), 0x801u);
    EXPECT_NE(std::string(e.what()).find("expected 0x803 found 0x801"), std::string::npos) << e.what();
  }
}

TEST(Idx, EmptyAndTruncated) {
  const fs::path empty = temp_path("empty");
  write_bytes(empty, {});
  EXPECT_THROW(load_idx_images(empty), IdxError);
  auto b = fixture_bytes();
  b.resize(b.size() - 1);
  const fs::path cut = temp_path("truncated");
  write_bytes(cut, b);
  EXPECT_THROW(load_idx_images(cut), IdxError);
  EXPECT_THROW(load_idx_images(temp_path("does-not-exist")), FormatError);
}

TEST(Idx, DimensionOverflow) {
  std::vector<std::uint8_t> b;
  put_be32(b, 0x00000803);
  put_be32(b, 0xFFFFFFFFu);
  put_be32(b, 0xFFFFu);
  put_be32(b, 0xFFFFu);
  const fs::path p = temp_path("overflow");
  write_bytes(p, b);
  EXPECT_THROW(load_idx_images(p), IdxError);
}

TEST(BinaryRows, ParseAndReject) {
  const fs::path p = temp_path("rows.amat");
  std::ofstream(p) << "0 1 1\n1 0 0\n";
  const Matrix m = load_binary_rows(p);
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m(1, 2), 0.0);
  const fs::path bad = temp_path("bad.amat");
  std::ofstream(bad) << "0 1\n1 0 1\n";
  EXPECT_THROW(load_binary_rows(bad), FormatError);
  const fs::path bad2 = temp_path("bad2.amat");
  std::ofstream(bad2) << "0 0.5\n";
  EXPECT_THROW(load_binary_rows(bad2), FormatError);
}

TEST(Binarize, ExtremesAndDeterminism) {
  EXPECT_EQ(binarize_static(Matrix::Zero(3, 5), 1), Matrix::Zero(3, 5));
  EXPECT_EQ(binarize_static(Matrix::Ones(3, 5), 1), Matrix::Ones(3, 5));
  const Matrix img = Matrix::Constant(20, 30, 0.5);
  EXPECT_EQ(dataset_hash(binarize_static(img, 7)), dataset_hash(binarize_static(img, 7)));
  EXPECT_NE(dataset_hash(binarize_static(img, 7)), dataset_hash(binarize_static(img, 8)));
  const Matrix b = binarize_static(img, 7);
  EXPECT_NEAR(b.mean(), 0.5, 3.0 * 0.5 / std::sqrt(600.0));
  EXPECT_THROW(binarize_static(Matrix::Constant(1, 1, 1.5), 1), DomainError);
}

TEST(Synthetic, NoiselessHasOnlyPrototypes) {
  const auto s = make_synthetic(SyntheticSpec{2, 16, 0.0, 200}, 3);
  std::set<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < s.data.rows(); ++r) rows.insert(std::vector<double>(s.data.row(r).begin(), s.data.row(r).end()));
  std::set<std::vector<double>> protos;
  for (Eigen::Index r = 0; r < 2; ++r)
    protos.insert(std::vector<double>(s.prototypes.row(r).begin(), s.prototypes.row(r).end()));
  EXPECT_EQ(rows, protos);
}

TEST(Synthetic, BitMeansMatchMixture) {
  const SyntheticSpec spec{4, 32, 0.1, 20000};
  const auto s = make_synthetic(spec, 5);
  for (Eigen::Index j = 0; j < 32; ++j) {
    double p = 0.0;
    for (Eigen::Index m = 0; m < 4; ++m) p += 0.25 * (s.prototypes(m, j) * (1 - spec.noise) + (1 - s.prototypes(m, j)) * spec.noise);
    EXPECT_NEAR(s.data.col(j).mean(), p, 3.0 * std::sqrt(p * (1 - p) / spec.n)) << j;
  }
}

TEST(Synthetic, EmptyAndInvalid) {
  const auto s = make_synthetic(SyntheticSpec{2, 8, 0.05, 0}, 1);
  EXPECT_EQ(s.data.rows(), 0);
  EXPECT_EQ(s.data.cols(), 8);
  EXPECT_THROW(make_synthetic(SyntheticSpec{0, 8, 0.05, 10}, 1), ConfigError);
  EXPECT_THROW(make_synthetic(SyntheticSpec{2, 8, 0.7, 10}, 1), ConfigError);
  EXPECT_EQ(dataset_hash(make_synthetic(SyntheticSpec{}, 9).data), dataset_hash(make_synthetic(SyntheticSpec{}, 9).data));
}

TEST(Baseline, ClosedForm) {
  Matrix train(4, 2);
  train << 1, 0, 1, 0, 1, 1, 0, 0;
  Matrix eval(2, 2);
  eval << 1, 1, 0, 0;
  // p = (0.75, 0.25).
  const double expected = 0.5 * ((std::log(0.75) + std::log(0.25)) + (std::log(0.25) + std::log(0.75)));
  EXPECT_NEAR(independent_bernoulli_baseline(train, eval), expected, 1e-14);
  // A constant column is clipped away from 0 and 1.
  Matrix t2 = Matrix::Ones(4, 1);
  EXPECT_NEAR(independent_bernoulli_baseline(t2, Matrix::Zero(1, 1)), std::log(0.5 / 4), 1e-14);
}

TEST(Dataset, SyntheticSplitAndLimit) {
  DatasetConfig c;
  c.synthetic = SyntheticSpec{3, 10, 0.05, 100};
  c.seed = 4;
  const Dataset d = load_dataset(c);
  EXPECT_EQ(d.train.rows(), 100);
  EXPECT_EQ(d.test.rows(), 25);
  c.limit = 10;
  EXPECT_EQ(load_dataset(c).train.rows(), 10);
  c.name = "omniglot";
  EXPECT_THROW(load_dataset(c), ConfigError);
}

TEST(Dataset, MnistFromIdxDirectory) {
  const fs::path dir = temp_path("mnist");
  fs::create_directories(dir);
  write_bytes(dir / "train-images-idx3-ubyte", fixture_bytes());
  write_bytes(dir / "t10k-images-idx3-ubyte", fixture_bytes());
  DatasetConfig c;
  c.name = "mnist";
  c.data_dir = dir;
  const Dataset d = load_dataset(c);
  EXPECT_EQ(d.train.rows(), 2);
  EXPECT_EQ(d.train.cols(), 16);
  EXPECT_EQ(d.train(0, 0), 0.0);  // pixel 0 never fires
  EXPECT_EQ(d.train(1, 0), 1.0);  // pixel 255 always fires
}

}  // namespace
}  // namespace relaxbm
