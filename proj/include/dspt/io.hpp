#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

namespace dspt::io {

// Little-endian scalar IO, byte-order independent of the host.
void write_u32(std::ostream& os, std::uint32_t v);
void write_f32(std::ostream& os, float v);
bool read_u32(std::istream& is, std::uint32_t& v);
bool read_f32(std::istream& is, float& v);

// Shortest round-trip decimal form (std::to_chars); "nan"/"inf" spelled out.
// Used for every CSV cell so reruns are byte-identical.
std::string format_double(double v);

// FNV-1a 64-bit, for config hashes in manifests.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

}  // namespace dspt::io
