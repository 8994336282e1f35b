// Copyright 2026 The relaxbm Authors
// SPDX-License-Identifier: Apache-2.0
#include "relaxbm/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "relaxbm/error.hpp"

namespace relaxbm {
namespace {

constexpr char kMagic[8] = {'R', 'L', 'X', 'B', 'M', 'K', 'V', '\0'};
constexpr std::uint8_t kTagInts = 1;
constexpr std::uint8_t kTagReals = 2;
constexpr std::uint8_t kTagString = 3;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw FormatError("container truncated at byte " + std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const KvContainer::Entry& KvContainer::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw FormatError("container has no key '" + key + "'");
  return it->second;
}

std::int64_t KvContainer::get_int(const std::string& key) const {
  const auto& v = get_ints(key);
  if (v.size() != 1) throw FormatError("key '" + key + "' is not a scalar");
  return v.front();
}

const std::vector<std::int64_t>& KvContainer::get_ints(const std::string& key) const {
  const auto* v = std::get_if<std::vector<std::int64_t>>(&at(key));
  if (!v) throw FormatError("key '" + key + "' is not an int64 array");
  return *v;
}

const std::vector<double>& KvContainer::get_reals(const std::string& key) const {
  const auto* v = std::get_if<std::vector<double>>(&at(key));
  if (!v) throw FormatError("key '" + key + "' is not a float64 array");
  return *v;
}

const std::string& KvContainer::get_string(const std::string& key) const {
  const auto* v = std::get_if<std::string>(&at(key));
  if (!v) throw FormatError("key '" + key + "' is not a string");
  return *v;
}

std::vector<std::uint8_t> KvContainer::serialize() const {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [key, entry] : entries_) {
    w.u32(static_cast<std::uint32_t>(key.size()));
    w.bytes(key.data(), key.size());
    if (const auto* ints = std::get_if<std::vector<std::int64_t>>(&entry)) {
      w.u8(kTagInts);
      w.u64(ints->size());
      for (std::int64_t v : *ints) w.u64(static_cast<std::uint64_t>(v));
    } else if (const auto* reals = std::get_if<std::vector<double>>(&entry)) {
      w.u8(kTagReals);
      w.u64(reals->size());
      for (double v : *reals) w.u64(std::bit_cast<std::uint64_t>(v));
    } else {
      const auto& s = std::get<std::string>(entry);
      w.u8(kTagString);
      w.u64(s.size());
      w.bytes(s.data(), s.size());
    }
  }
  const std::uint64_t checksum = fnv1a64(w.data());
  w.u64(checksum);
  return std::move(w.data());
}

KvContainer KvContainer::deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("not a relaxbm container (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  if (bytes.size() < 8 + 4 + 4 + 8) throw FormatError("container truncated");
  const std::uint64_t stored = [&] {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[bytes.size() - 8 + i]) << (8 * i);
    return v;
  }();
  if (fnv1a64(bytes.first(bytes.size() - 8)) != stored) throw FormatError("container checksum mismatch");

  KvContainer out;
  const std::uint32_t count = r.u32();
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t key_len = r.u32();
    auto key_bytes = r.take(key_len);
    std::string key(key_bytes.begin(), key_bytes.end());
    const std::uint8_t tag = r.u8();
    const std::uint64_t n = r.u64();
    if (tag == kTagInts || tag == kTagReals) {
      if (n > r.remaining() / 8) throw FormatError("container entry '" + key + "' overruns the file");
      if (tag == kTagInts) {
        std::vector<std::int64_t> v(n);
        for (auto& x : v) x = static_cast<std::int64_t>(r.u64());
        out.entries_[key] = std::move(v);
      } else {
        std::vector<double> v(n);
        for (auto& x : v) x = std::bit_cast<double>(r.u64());
        out.entries_[key] = std::move(v);
      }
    } else if (tag == kTagString) {
      auto s = r.take(n);
      out.entries_[key] = std::string(s.begin(), s.end());
    } else {
      throw FormatError("unknown entry tag " + std::to_string(tag) + " for key '" + key + "'");
    }
  }
  if (r.remaining() != 8) throw FormatError("trailing bytes in container");
  return out;
}

void KvContainer::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + tmp + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

KvContainer KvContainer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace relaxbm
