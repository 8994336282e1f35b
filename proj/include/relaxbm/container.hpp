// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace relaxbm {

/// Versioned key-value container used for every checkpoint the library writes.
///
/// Layout (all integers little-endian):
///   magic      8 bytes  "RLXBMKV\0"
///   version    u32      kContainerVersion
///   count      u32      number of entries
///   entries    count x { u32 key_len, key bytes, u8 tag, u64 n, payload }
///   checksum   u64      FNV-1a 64 over every preceding byte
/// Tags: 1 = int64[n], 2 = float64[n] (IEEE-754), 3 = UTF-8 string of n bytes.
/// Entries are written in ascending key order. See docs/checkpoint-format.md.
class KvContainer {
 public:
  static constexpr std::uint32_t kContainerVersion = 1;

  void put(const std::string& key, std::int64_t value) { entries_[key] = std::vector<std::int64_t>{value}; }
  void put(const std::string& key, std::vector<std::int64_t> values) { entries_[key] = std::move(values); }
  void put(const std::string& key, std::span<const double> values) {
    entries_[key] = std::vector<double>(values.begin(), values.end());
  }
  void put(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void put(const std::string& key, const char* value) { entries_[key] = std::string(value); }

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

  std::int64_t get_int(const std::string& key) const;
  const std::vector<std::int64_t>& get_ints(const std::string& key) const;
  const std::vector<double>& get_reals(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  std::vector<std::uint8_t> serialize() const;
  static KvContainer deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static KvContainer load(const std::filesystem::path& path);

  std::size_t size() const { return entries_.size(); }

 private:
  using Entry = std::variant<std::vector<std::int64_t>, std::vector<double>, std::string>;
  const Entry& at(const std::string& key) const;
  std::map<std::string, Entry> entries_;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace relaxbm
