// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/data.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "relaxbm/container.hpp"
#include "relaxbm/rng.hpp"

namespace relaxbm {
namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t at, const std::filesystem::path& path) {
  if (bytes.size() < at + 4) throw IdxError(path.string() + ": truncated IDX header");
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

void check_magic(std::uint32_t expected, std::uint32_t found, const std::filesystem::path& path) {
  if (found != expected) {
    std::ostringstream msg;
    msg << path.string() << ": bad IDX magic, expected 0x" << std::hex << expected << " found 0x" << found;
    throw IdxError(msg.str(), expected, found);
  }
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                              static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace

Matrix load_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  check_magic(kIdxImageMagic, be32(bytes, 0, path), path);
  const std::uint64_t n = be32(bytes, 4, path), rows = be32(bytes, 8, path), cols = be32(bytes, 12, path);
  const std::uint64_t pixels = rows * cols;
  if (rows != 0 && cols != 0 && (n > std::numeric_limits<std::uint32_t>::max() / pixels || pixels > (1U << 24)))
    throw IdxError(path.string() + ": IDX dimensions overflow");
  const std::uint64_t need = 16 + n * pixels;
  if (bytes.size() < need)
    throw IdxError(path.string() + ": truncated IDX payload (" + std::to_string(bytes.size()) + " of " +
                   std::to_string(need) + " bytes)");
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < pixels; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bytes[16 + i * pixels + j] / 255.0;
  return out;
}

std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  check_magic(kIdxLabelMagic, be32(bytes, 0, path), path);
  const std::uint64_t n = be32(bytes, 4, path);
  if (bytes.size() < 8 + n) throw IdxError(path.string() + ": truncated IDX payload");
  return {bytes.begin() + 8, bytes.begin() + static_cast<std::ptrdiff_t>(8 + n)};
}

void write_idx_images(const std::filesystem::path& path, const Matrix& images, std::uint32_t rows, std::uint32_t cols) {
  if (static_cast<std::uint64_t>(images.cols()) != std::uint64_t{rows} * cols)
    throw DimensionError("image width does not match rows × cols");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.rows()));
  put_be32(out, rows);
  put_be32(out, cols);
  for (Eigen::Index i = 0; i < images.rows(); ++i)
    for (Eigen::Index j = 0; j < images.cols(); ++j) {
      const double v = images(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("pixel values must lie in [0,1]");
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  if (!out) throw FormatError("write failed: " + path.string());
}

Matrix load_binary_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      if (tok != "0" && tok != "1") throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 0 or 1");
      row.push_back(tok == "1" ? 1.0 : 0.0);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

Matrix binarize_static(const Matrix& images, std::uint64_t seed) {
  Rng rng(seed, Stream::kData, 0);
  Matrix out(images.rows(), images.cols());
  for (Eigen::Index i = 0; i < images.rows(); ++i)
    for (Eigen::Index j = 0; j < images.cols(); ++j) {
      const double p = images(i, j);
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pixel values must lie in [0,1]");
      out(i, j) = rng.uniform() < p ? 1.0 : 0.0;
    }
  return out;
}

SyntheticData make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.modes < 1) throw ConfigError("synthetic data needs at least one mode");
  if (spec.dim < 1) throw ConfigError("synthetic data needs a positive dimension");
  if (!(spec.noise >= 0.0 && spec.noise <= 0.5)) throw ConfigError("synthetic noise must lie in [0, 0.5]");
  Rng proto_rng(seed, Stream::kData, 1);
  SyntheticData out;
  out.prototypes.resize(static_cast<Eigen::Index>(spec.modes), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index m = 0; m < out.prototypes.rows(); ++m)
    for (Eigen::Index j = 0; j < out.prototypes.cols(); ++j) out.prototypes(m, j) = proto_rng.bernoulli(0.5) ? 1.0 : 0.0;
  Rng rng(seed, Stream::kData, 2);
  out.data.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index i = 0; i < out.data.rows(); ++i) {
    const auto mode = static_cast<Eigen::Index>(rng.below(spec.modes));
    for (Eigen::Index j = 0; j < out.data.cols(); ++j) {
      const bool flip = rng.uniform() < spec.noise;
      out.data(i, j) = flip ? 1.0 - out.prototypes(mode, j) : out.prototypes(mode, j);
    }
  }
  return out;
}

std::uint64_t dataset_hash(const Matrix& data) {
  std::vector<unsigned char> bytes(16 + sizeof(double) * static_cast<std::size_t>(data.size()));
  const std::uint64_t r = static_cast<std::uint64_t>(data.rows()), c = static_cast<std::uint64_t>(data.cols());
  std::memcpy(bytes.data(), &r, 8);
  std::memcpy(bytes.data() + 8, &c, 8);
  if (data.size() > 0) std::memcpy(bytes.data() + 16, data.data(), sizeof(double) * static_cast<std::size_t>(data.size()));
  return fnv1a64(bytes);
}

double independent_bernoulli_baseline(const Matrix& train, const Matrix& eval) {
  if (train.rows() == 0) throw DomainError("baseline needs training data");
  if (train.cols() != eval.cols()) throw DimensionError("train and eval widths differ");
  const double n = static_cast<double>(train.rows());
  const double lo = 0.5 / n;
  Vector p = train.colwise().mean().transpose();
  p = p.cwiseMax(lo).cwiseMin(1.0 - lo);
  const Vector log_p = p.array().log().matrix(), log_1mp = (1.0 - p.array()).log().matrix();
  if (eval.rows() == 0) return 0.0;
  const Vector ones = Vector::Ones(eval.cols());
  const Vector ll = eval * log_p + (ones.transpose().replicate(eval.rows(), 1) - eval) * log_1mp;
  return ll.mean();
}

Dataset load_dataset(const DatasetConfig& config) {
  Dataset out;
  if (config.name == "synthetic") {
    SyntheticData all = make_synthetic({config.synthetic.modes, config.synthetic.dim, config.synthetic.noise,
                                        config.synthetic.n + config.synthetic.n / 4},
                                       config.seed);
    const auto n = static_cast<Eigen::Index>(config.synthetic.n);
    out.train = all.data.topRows(n);
    out.test = all.data.bottomRows(all.data.rows() - n);
  } else if (config.name == "mnist") {
    std::filesystem::path dir = config.data_dir;
    if (dir.empty()) {
      const char* env = std::getenv("RELAXBM_DATA_DIR");
      if (env == nullptr) throw ConfigError("mnist needs --data-dir or RELAXBM_DATA_DIR");
      dir = env;
    }
    if (std::filesystem::exists(dir / "binarized_mnist_train.amat")) {
      out.train = load_binary_rows(dir / "binarized_mnist_train.amat");
      out.test = load_binary_rows(dir / "binarized_mnist_test.amat");
    } else {
      out.train = binarize_static(load_idx_images(dir / "train-images-idx3-ubyte"), config.seed);
      out.test = binarize_static(load_idx_images(dir / "t10k-images-idx3-ubyte"), config.seed + 1);
    }
  } else {
    throw ConfigError("unknown dataset '" + config.name + "' (expected synthetic or mnist)");
  }
  if (config.limit > 0) {
    const auto lim = static_cast<Eigen::Index>(config.limit);
    if (out.train.rows() > lim) out.train.conservativeResize(lim, Eigen::NoChange);
    if (out.test.rows() > lim) out.test.conservativeResize(lim, Eigen::NoChange);
  }
  return out;
}

}  // namespace relaxbm
