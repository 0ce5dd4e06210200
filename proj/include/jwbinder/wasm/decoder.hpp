#pragma once

#include <span>

#include "jwbinder/wasm/leb128.hpp"
#include "jwbinder/wasm/module.hpp"

namespace jwbinder::wasm {

// Decodes a binary module (MVP core). Custom and unknown sections are skipped
// and recorded; a function body using an opcode outside the supported set is
// kept with body_ok = false and a diagnostic instead of failing the module.
// Structural problems raise DecodeError (BadMagic, TruncatedSection,
// MalformedLeb, UnsupportedOpcode, Malformed), each carrying a byte offset.
WasmModule decode_module(std::span<const uint8_t> bytes);

// Decodes an instruction stream (the part of a code entry after the locals
// declarations), consuming the terminating `end`. `stream_offset` is the
// position of the stream inside the module, used for error offsets.
std::vector<Instruction> decode_body(std::span<const uint8_t> bytes, size_t stream_offset = 0);

}  // namespace jwbinder::wasm
