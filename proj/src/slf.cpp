#include "vcrit/slf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "vcrit/errors.hpp"

namespace vcrit::slf {

static_assert(std::endian::native == std::endian::little,
              "SLF1 writer assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'L', 'F', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw IoError("slf: truncated file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void write_header(std::ostream& out, PayloadKind kind, std::uint32_t components,
                  const GridSpec& grid) {
  out.write(kMagic, 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(kind));
  put<std::uint32_t>(out, components);
  put<std::uint32_t>(out, 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n()));
  put<double>(out, grid.box_length());
}

GridSpec read_header(std::istream& in, PayloadKind expected) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("slf: bad magic");
  }
  const auto version = get<std::uint16_t>(in);
  if (version != kVersion) throw IoError("slf: unsupported version " + std::to_string(version));
  const auto kind = static_cast<PayloadKind>(get<std::uint16_t>(in));
  if (kind != expected) throw IoError("slf: unexpected payload kind");
  const auto components = get<std::uint32_t>(in);
  if ((kind == PayloadKind::VectorF64 && components != 3) ||
      (kind == PayloadKind::ByteGrid && components != 1)) {
    throw IoError("slf: bad component count");
  }
  get<std::uint32_t>(in);
  const auto n = get<std::uint32_t>(in);
  const auto L = get<double>(in);
  try {
    return GridSpec(n, L);
  } catch (const ParameterError& e) {
    throw IoError(std::string("slf: invalid grid header: ") + e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("slf: cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("slf: cannot open: " + path.string());
  return in;
}

}  // namespace

void write_field(std::ostream& out, const VectorField3D& field) {
  write_header(out, PayloadKind::VectorF64, 3, field.grid());
  const auto data = field.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size_bytes()));
  if (!out) throw IoError("slf: write failed");
}

VectorField3D read_field(std::istream& in) {
  const GridSpec grid = read_header(in, PayloadKind::VectorF64);
  std::vector<double> values(3 * grid.cells());
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw IoError("slf: truncated payload");
  }
  VectorField3D f(grid, std::move(values));
  if (!f.all_finite()) throw IoError("slf: non-finite values in payload");
  return f;
}

void write_field(const std::filesystem::path& path, const VectorField3D& field) {
  auto out = open_out(path);
  write_field(out, field);
}

VectorField3D read_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_field(in);
}

void write_mask(const std::filesystem::path& path, const GridSpec& grid,
                std::span<const std::uint8_t> occupancy) {
  if (occupancy.size() != grid.cells()) throw IoError("slf: mask size does not match grid");
  auto out = open_out(path);
  write_header(out, PayloadKind::ByteGrid, 1, grid);
  for (auto v : occupancy) out.put(static_cast<char>(v ? 1 : 0));
  if (!out) throw IoError("slf: write failed: " + path.string());
}

std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, GridSpec* grid_out) {
  auto in = open_in(path);
  const GridSpec grid = read_header(in, PayloadKind::ByteGrid);
  std::vector<std::uint8_t> occ(grid.cells());
  if (!in.read(reinterpret_cast<char*>(occ.data()), static_cast<std::streamsize>(occ.size()))) {
    throw IoError("slf: truncated payload");
  }
  if (grid_out) *grid_out = grid;
  return occ;
}

}  // namespace vcrit::slf
