#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace claimchain {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;
using Hash256 = std::array<std::uint8_t, 32>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
  return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, BytesView b) {
  out.insert(out.end(), b.begin(), b.end());
}

std::string hex_encode(BytesView data);
std::optional<Bytes> hex_decode(std::string_view hex);

// Serialization helpers shared by every wire format in the project.  All
// multi-byte integers are little-endian; variable-length fields carry a
// 32-bit length prefix.  Hashing and signing preimages are built with the
// same writer, so the byte layout here is part of the protocol.
namespace wire {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  // raw bytes, no framing
  void raw(BytesView b) { append(buf_, b); }

  // length-prefixed bytes
  void bytes(BytesView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }

  void bytes(const std::string& s) { bytes(BytesView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())); }

  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Bounds-checked reader.  Every accessor reports failure through the ok()
// flag instead of throwing, so parsers can bail out with a single check.
class Reader {
 public:
  explicit Reader(BytesView b) : data_(b) {}

  bool ok() const { return ok_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  std::uint8_t u8() {
    if (!need(1)) return 0;
    return data_[pos_++];
  }

  std::uint32_t u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  BytesView raw(size_t n) {
    if (!need(n)) return {};
    BytesView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }

  BytesView bytes() {
    std::uint32_t n = u32();
    if (!ok_) return {};
    return raw(n);
  }

  template <size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> out{};
    BytesView v = raw(N);
    if (ok_) std::memcpy(out.data(), v.data(), N);
    return out;
  }

 private:
  bool need(size_t n) {
    if (!ok_ || data_.size() - pos_ < n) {
      ok_ = false;
      return false;
    }
    return true;
  }

  BytesView data_;
  size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace wire
}  // namespace claimchain
