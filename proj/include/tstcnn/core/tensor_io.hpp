#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "tstcnn/core/tensor.hpp"

// TT3D tensor files: "TT3D", u8 version (1), u8 ndim, ndim x u32 LE extents,
// then numel x f32 LE payload.
//
// Checkpoints: u32 LE count, then per entry u32 LE name length, UTF-8 name bytes and
// u64 LE absolute offset of that entry's TT3D blob; blobs follow in entry order.

namespace tstcnn::io {

inline constexpr std::uint8_t kTt3dVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensorf>>;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw ValidationError("truncated tensor data");
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) {
    if (p > size_) throw ValidationError("offset beyond end of data");
    pos_ = p;
  }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline Tensorf read_tt3d(Reader& r) {
  const char magic[4] = {static_cast<char>(r.u8()), static_cast<char>(r.u8()),
                         static_cast<char>(r.u8()), static_cast<char>(r.u8())};
  if (std::memcmp(magic, "TT3D", 4) != 0) throw ValidationError("bad TT3D magic");
  const std::uint8_t version = r.u8();
  if (version != kTt3dVersion)
    throw ValidationError("unsupported TT3D version " + std::to_string(version));
  const std::uint8_t ndim = r.u8();
  std::vector<std::size_t> dims(ndim);
  for (auto& d : dims) d = r.u32();
  Shape shape(dims);
  r.need(shape.numel() * 4);
  std::vector<float> data(shape.numel());
  for (auto& v : data) v = r.f32();
  return Tensorf(shape, std::move(data));
}

}  // namespace detail

template <typename T>
void append_tt3d(std::vector<std::uint8_t>& out, const Tensor<T>& t) {
  out.insert(out.end(), {'T', 'T', '3', 'D', kTt3dVersion});
  if (t.rank() > 255) throw ValidationError("TT3D supports at most 255 axes");
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape().dims()) {
    if (d > UINT32_MAX) throw ValidationError("TT3D extent exceeds u32");
    detail::put_u32(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + 4 * t.numel());
  for (std::size_t i = 0; i < t.numel(); ++i)
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(t[i])));
}

template <typename T>
std::vector<std::uint8_t> encode_tt3d(const Tensor<T>& t) {
  std::vector<std::uint8_t> out;
  append_tt3d(out, t);
  return out;
}

inline Tensorf decode_tt3d(const std::vector<std::uint8_t>& bytes) {
  detail::Reader r(bytes.data(), bytes.size());
  Tensorf t = detail::read_tt3d(r);
  if (r.pos() != bytes.size()) throw ValidationError("trailing bytes after TT3D payload");
  return t;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t) {
  write_file(path, encode_tt3d(t));
}

inline Tensorf load_tensor(const std::filesystem::path& path) { return decode_tt3d(read_file(path)); }

inline std::vector<std::uint8_t> encode_checkpoint(const NamedTensors& entries) {
  std::vector<std::uint8_t> header;
  detail::put_u32(header, static_cast<std::uint32_t>(entries.size()));
  std::size_t header_size = 4;
  for (const auto& [name, t] : entries) header_size += 4 + name.size() + 8;

  std::vector<std::uint8_t> body;
  std::vector<std::uint64_t> offsets;
  for (const auto& [name, t] : entries) {
    offsets.push_back(header_size + body.size());
    append_tt3d(body, t);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string& name = entries[i].first;
    detail::put_u32(header, static_cast<std::uint32_t>(name.size()));
    header.insert(header.end(), name.begin(), name.end());
    detail::put_u64(header, offsets[i]);
  }
  header.insert(header.end(), body.begin(), body.end());
  return header;
}

inline NamedTensors decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  detail::Reader r(bytes.data(), bytes.size());
  const std::uint32_t count = r.u32();
  std::vector<std::pair<std::string, std::uint64_t>> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32();
    r.need(len);
    std::string name(len, '\0');
    for (auto& c : name) c = static_cast<char>(r.u8());
    table.emplace_back(std::move(name), r.u64());
  }
  NamedTensors out;
  for (auto& [name, offset] : table) {
    r.seek(static_cast<std::size_t>(offset));
    out.emplace_back(std::move(name), detail::read_tt3d(r));
  }
  return out;
}

inline void save_checkpoint(const std::filesystem::path& path, const NamedTensors& entries) {
  write_file(path, encode_checkpoint(entries));
}

inline NamedTensors load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace tstcnn::io
