// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

namespace relaxbm {

/// Stream identifiers used to derive independent generators from one seed.
enum class Stream : std::uint64_t {
  kInit = 1,
  kData = 2,
  kUpdate = 3,
  kNegative = 4,
  kAis = 5,
  kEval = 6,
  kDiag = 7,
  kMember = 8,
  kResample = 9,
  kBootstrap = 10,
};

/// Counter-based generator (SplitMix64 over a keyed counter).
///
/// Its full state is two integers, so any (seed, stream, index) triple gives a
/// reproducible generator that can be created per chain or per update in O(1).
/// Satisfies UniformRandomBitGenerator so std distributions accept it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)), counter_(0) {}
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
      : key_(derive(seed, static_cast<std::uint64_t>(stream), index)), counter_(0) {}
  Rng(std::uint64_t key, std::uint64_t counter, bool /*raw*/) : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    ++counter_;
    return mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();

  /// A child generator whose stream depends on this generator's next draw.
  Rng split(std::uint64_t index) { return Rng(next(), Stream::kMember, index); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc908ULL);
    h = mix(h ^ (stream * 0xbb67ae8584caa73bULL));
    return mix(h ^ (index * 0x3c6ef372fe94f82bULL + 0xa54ff53a5f1d36f1ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace relaxbm
