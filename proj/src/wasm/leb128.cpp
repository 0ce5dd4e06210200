#include "jwbinder/wasm/leb128.hpp"

namespace jwbinder::wasm {

namespace {

template <typename T, bool kSigned>
std::pair<T, size_t> decode_leb(std::span<const uint8_t> bytes, size_t offset) {
  constexpr size_t max_bytes = (sizeof(T) * 8 + 6) / 7;
  using U = std::make_unsigned_t<T>;
  U value = 0;
  unsigned shift = 0;
  size_t pos = offset;
  for (;;) {
    if (pos >= bytes.size()) {
      size_t at = bytes.empty() ? 0 : bytes.size() - 1;
      throw DecodeError(DecodeError::Kind::MalformedLeb, at, "truncated LEB128");
    }
    if (pos - offset >= max_bytes) {
      throw DecodeError(DecodeError::Kind::MalformedLeb, offset,
                        "LEB128 exceeds value width");
    }
    uint8_t byte = bytes[pos++];
    value |= static_cast<U>(byte & 0x7F) << shift;
    shift += 7;
    if ((byte & 0x80) == 0) {
      if constexpr (kSigned) {
        if (shift < sizeof(T) * 8 && (byte & 0x40)) {
          value |= static_cast<U>(~U{0}) << shift;
        }
      }
      return {static_cast<T>(value), pos};
    }
  }
}

}  // namespace

std::pair<uint32_t, size_t> decode_uleb32(std::span<const uint8_t> bytes, size_t offset) {
  return decode_leb<uint32_t, false>(bytes, offset);
}

std::pair<uint64_t, size_t> decode_uleb64(std::span<const uint8_t> bytes, size_t offset) {
  return decode_leb<uint64_t, false>(bytes, offset);
}

std::pair<int32_t, size_t> decode_sleb32(std::span<const uint8_t> bytes, size_t offset) {
  return decode_leb<int32_t, true>(bytes, offset);
}

std::pair<int64_t, size_t> decode_sleb64(std::span<const uint8_t> bytes, size_t offset) {
  return decode_leb<int64_t, true>(bytes, offset);
}

}  // namespace jwbinder::wasm
