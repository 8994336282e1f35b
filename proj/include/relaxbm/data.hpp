// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "relaxbm/error.hpp"
#include "relaxbm/numeric.hpp"

namespace relaxbm {

/// Malformed IDX file. For a bad magic number, expected() and found() hold the
/// two values; otherwise both are zero.
class IdxError : public FormatError {
 public:
  explicit IdxError(const std::string& what, std::uint32_t expected = 0, std::uint32_t found = 0)
      : FormatError(what), expected_(expected), found_(found) {}
  std::uint32_t expected() const { return expected_; }
  std::uint32_t found() const { return found_; }

 private:
  std::uint32_t expected_;
  std::uint32_t found_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Unsigned-byte image tensor as rows of pixel/255.
Matrix load_idx_images(const std::filesystem::path& path);
/// Label vector.
std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path);
/// Writes `images` (values in [0,1], rounded to bytes) as an IDX image file of
/// rows × cols pixels per image.
void write_idx_images(const std::filesystem::path& path, const Matrix& images, std::uint32_t rows, std::uint32_t cols);

/// Plain text: one image per line, pixels as 0/1 separated by whitespace.
Matrix load_binary_rows(const std::filesystem::path& path);

/// Each pixel sampled once as Bernoulli(pixel) from the seed.
Matrix binarize_static(const Matrix& images, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t modes = 4;
  std::size_t dim = 32;
  double noise = 0.05;
  std::size_t n = 1000;
};

struct SyntheticData {
  Matrix data;        // n × dim binary rows
  Matrix prototypes;  // modes × dim
};

/// Random binary prototypes; each point picks a mode uniformly and flips each
/// bit with probability `noise`.
SyntheticData make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// FNV-1a of the shape and raw values.
std::uint64_t dataset_hash(const Matrix& data);

/// Mean log-likelihood of `eval` under independent Bernoulli bits fit to
/// `train` by maximum likelihood; probabilities are clipped to [1/(2n), 1−1/(2n)].
double independent_bernoulli_baseline(const Matrix& train, const Matrix& eval);

struct DatasetConfig {
  std::string name = "synthetic";  // synthetic or mnist
  std::filesystem::path data_dir;  // mnist only; RELAXBM_DATA_DIR when empty
  SyntheticSpec synthetic;
  std::uint64_t seed = 0;
  std::size_t limit = 0;  // keep only the first rows when > 0
};

struct Dataset {
  Matrix train;
  Matrix test;
};

/// MNIST: train-images-idx3-ubyte / t10k-images-idx3-ubyte, statically
/// binarized, or binarized_mnist_{train,test}.amat text rows when present.
/// Synthetic: n training points and n/4 test points from the same prototypes.
Dataset load_dataset(const DatasetConfig& config);

}  // namespace relaxbm
