// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint format. All integers and floats are little-endian.
//
//   magic    8 bytes   "PCCLNCKP"
//   version  u32       kCheckpointVersion
//   kind     string    model-kind tag, e.g. "detector"
//   meta     u32 count, then (string key, string value) pairs
//   tensors  u64 count, then per tensor:
//              string name, u32 rank, rank x u64 dims, numel x f64 values
//
// where string = u32 byte length followed by the bytes.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pcclean/autodiff/tensor.hpp"

namespace pcclean::ad {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'P', 'C', 'C', 'L', 'N', 'C', 'K', 'P'};

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<NamedTensor> tensors;

  [[nodiscard]] const std::string* find_meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return &v;
    return nullptr;
  }
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  [[nodiscard]] const std::string& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  [[nodiscard]] bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw DataError("checkpoint: truncated file");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

[[nodiscard]] inline std::string encode_checkpoint(const Checkpoint& ckpt) {
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(ckpt.version);
  w.str(ckpt.kind);
  w.u32(static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    w.str(k);
    w.str(v);
  }
  w.u64(ckpt.tensors.size());
  for (const NamedTensor& t : ckpt.tensors) {
    if (numel(t.shape) != t.values.size()) throw InvalidArgument("checkpoint: tensor '" + t.name + "' shape mismatch");
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.u64(d);
    for (double v : t.values) w.f64(v);
  }
  return w.bytes();
}

[[nodiscard]] inline Checkpoint decode_checkpoint(std::string bytes) {
  detail::ByteReader r(std::move(bytes));
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw DataError("checkpoint: bad magic");
  Checkpoint c;
  c.version = r.u32();
  if (c.version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(c.version));
  }
  c.kind = r.str();
  const std::uint32_t nmeta = r.u32();
  for (std::uint32_t i = 0; i < nmeta; ++i) {
    std::string k = r.str();
    std::string v = r.str();
    c.metadata.emplace_back(std::move(k), std::move(v));
  }
  const std::uint64_t ntensors = r.u64();
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    NamedTensor t;
    t.name = r.str();
    const std::uint32_t rank = r.u32();
    for (std::uint32_t d = 0; d < rank; ++d) t.shape.push_back(static_cast<std::size_t>(r.u64()));
    t.values.resize(numel(t.shape));
    for (double& v : t.values) v = r.f64();
    c.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw DataError("checkpoint: trailing bytes after last tensor");
  return c;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

[[nodiscard]] inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace pcclean::ad
