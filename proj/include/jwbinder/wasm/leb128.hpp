#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace jwbinder::wasm {

class DecodeError : public std::runtime_error {
 public:
  enum class Kind : uint8_t {
    BadMagic,
    TruncatedSection,
    MalformedLeb,
    UnsupportedOpcode,
    Malformed,
  };

  DecodeError(Kind kind, size_t offset, std::string detail, uint8_t opcode = 0)
      : std::runtime_error(detail + " at offset " + std::to_string(offset)),
        kind_(kind),
        offset_(offset),
        opcode_(opcode) {}

  Kind kind() const { return kind_; }
  size_t offset() const { return offset_; }
  uint8_t opcode() const { return opcode_; }

 private:
  Kind kind_;
  size_t offset_;
  uint8_t opcode_;
};

// Little-endian base 128. The 32-bit forms accept at most 5 bytes, the 64-bit
// forms at most 10; a continuation bit that never clears inside the width
// bound raises MalformedLeb.
std::pair<uint32_t, size_t> decode_uleb32(std::span<const uint8_t> bytes, size_t offset);
std::pair<uint64_t, size_t> decode_uleb64(std::span<const uint8_t> bytes, size_t offset);
std::pair<int32_t, size_t> decode_sleb32(std::span<const uint8_t> bytes, size_t offset);
std::pair<int64_t, size_t> decode_sleb64(std::span<const uint8_t> bytes, size_t offset);

}  // namespace jwbinder::wasm
