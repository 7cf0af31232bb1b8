#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "vcrit/field.hpp"

namespace vcrit::slf {

/// SLF1 layout (all little-endian):
///   bytes 0..3   "SLF1"
///   bytes 4..5   u16 version (1)
///   bytes 6..7   u16 payload kind (0 = f64 vector field, 1 = u8 byte grid)
///   bytes 8..11  u32 component count (3 for vector fields, 1 for byte grids)
///   bytes 12..15 reserved, zero
///   u32 n, f64 box_length, then the payload in x-fastest order, component-major.
inline constexpr std::uint16_t kVersion = 1;
enum class PayloadKind : std::uint16_t { VectorF64 = 0, ByteGrid = 1 };

void write_field(std::ostream& out, const VectorField3D& field);
VectorField3D read_field(std::istream& in);

void write_field(const std::filesystem::path& path, const VectorField3D& field);
VectorField3D read_field(const std::filesystem::path& path);

/// 0/1 occupancy grid (e.g. a super-level set mask).
void write_mask(const std::filesystem::path& path, const GridSpec& grid,
                std::span<const std::uint8_t> occupancy);
std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, GridSpec* grid_out);

}  // namespace vcrit::slf
