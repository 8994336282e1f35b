// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "relaxbm/numeric.hpp"
#include "relaxbm/rng.hpp"

namespace relaxbm {

enum class Arch { kLinear, kMlp };

std::string_view arch_name(Arch arch);
Arch parse_arch(std::string_view name);

/// Dense feed-forward net reading its weights from a flat parameter span.
/// Linear is a single affine map; Mlp has two tanh hidden layers.
///
/// Layout per layer: weight (out × in, column-major) followed by bias (out).
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(std::size_t inputs, std::size_t outputs, Arch arch, std::size_t hidden = 200);

  std::size_t inputs() const { return sizes_.front(); }
  std::size_t outputs() const { return sizes_.back(); }
  std::size_t num_params() const { return num_params_; }

  /// Weights uniform in ±1/√fan_in, biases zero.
  void init(std::span<double> params, Rng& rng) const;

  /// Activations of every layer, input first.
  struct Tape {
    std::vector<Vector> activations;
  };

  Vector forward(std::span<const double> params, const Vector& input, Tape* tape = nullptr) const;

  /// Accumulates ∂L/∂params into `grad` and returns ∂L/∂input.
  Vector backward(std::span<const double> params, const Tape& tape, const Vector& d_output,
                  std::span<double> grad) const;

 private:
  std::vector<std::size_t> sizes_{0, 0};
  std::size_t num_params_ = 0;
};

}  // namespace relaxbm
