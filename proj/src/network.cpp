// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/network.hpp"

#include <cmath>
#include <string>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

using MatMap = Eigen::Map<const Matrix>;
using MutMatMap = Eigen::Map<Matrix>;
using VecMap = Eigen::Map<const Vector>;
using MutVecMap = Eigen::Map<Vector>;

}  // namespace

std::string_view arch_name(Arch arch) { return arch == Arch::kLinear ? "linear" : "mlp"; }

Arch parse_arch(std::string_view name) {
  if (name == "linear") return Arch::kLinear;
  if (name == "mlp") return Arch::kMlp;
  throw ConfigError("unknown architecture '" + std::string(name) + "' (expected linear or mlp)");
}

DenseNet::DenseNet(std::size_t inputs, std::size_t outputs, Arch arch, std::size_t hidden) {
  if (outputs == 0) throw DimensionError("network needs at least one output");
  if (arch == Arch::kMlp && hidden == 0) throw DimensionError("hidden layer width must be positive");
  sizes_ = arch == Arch::kLinear ? std::vector<std::size_t>{inputs, outputs}
                                 : std::vector<std::size_t>{inputs, hidden, hidden, outputs};
  num_params_ = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) num_params_ += sizes_[l + 1] * (sizes_[l] + 1);
}

void DenseNet::init(std::span<double> params, Rng& rng) const {
  if (params.size() != num_params_) throw DimensionError("parameter span has the wrong size");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double bound = in > 0 ? 1.0 / std::sqrt(static_cast<double>(in)) : 0.0;
    for (std::size_t k = 0; k < in * out; ++k) params[offset + k] = bound * (2.0 * rng.uniform() - 1.0);
    offset += in * out;
    for (std::size_t k = 0; k < out; ++k) params[offset + k] = 0.0;
    offset += out;
  }
}

Vector DenseNet::forward(std::span<const double> params, const Vector& input, Tape* tape) const {
  if (params.size() != num_params_) throw DimensionError("parameter span has the wrong size");
  if (static_cast<std::size_t>(input.size()) != inputs()) throw DimensionError("network input has the wrong size");
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(input);
  }
  Vector h = input;
  std::size_t offset = 0;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]), out = static_cast<Eigen::Index>(sizes_[l + 1]);
    MatMap w(params.data() + offset, out, in);
    offset += static_cast<std::size_t>(in * out);
    VecMap b(params.data() + offset, out);
    offset += static_cast<std::size_t>(out);
    Vector next = b;
    if (in > 0) next.noalias() += w * h;
    if (l + 1 < layers) next = next.array().tanh().matrix();
    h = std::move(next);
    if (tape) tape->activations.push_back(h);
  }
  return h;
}

Vector DenseNet::backward(std::span<const double> params, const Tape& tape, const Vector& d_output,
                          std::span<double> grad) const {
  if (params.size() != num_params_ || grad.size() != num_params_)
    throw DimensionError("parameter span has the wrong size");
  const std::size_t layers = sizes_.size() - 1;
  if (tape.activations.size() != layers + 1) throw DimensionError("tape does not match the network");
  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += sizes_[l + 1] * (sizes_[l] + 1);
  }
  Vector delta = d_output;
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]), out = static_cast<Eigen::Index>(sizes_[l + 1]);
    if (l + 1 < layers) {
      const Vector& act = tape.activations[l + 1];
      delta = delta.cwiseProduct((1.0 - act.array().square()).matrix());
    }
    MatMap w(params.data() + offsets[l], out, in);
    MutMatMap gw(grad.data() + offsets[l], out, in);
    MutVecMap gb(grad.data() + offsets[l] + static_cast<std::size_t>(in * out), out);
    const Vector& x = tape.activations[l];
    if (in > 0) gw.noalias() += delta * x.transpose();
    gb += delta;
    Vector prev = in > 0 ? Vector(w.transpose() * delta) : Vector(0);
    delta = std::move(prev);
  }
  return delta;
}

}  // namespace relaxbm
