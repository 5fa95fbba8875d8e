#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "msc/volume.hpp"

namespace msc {

enum class DType { Float32, Float64 };

constexpr std::string_view dtype_code(DType d) { return d == DType::Float32 ? "<f4" : "<f8"; }

/// "<f4" or "<f8"; anything else throws UnsupportedDtype.
DType parse_dtype(std::string_view code);

struct NpyHeader {
  DType dtype = DType::Float64;
  bool fortran_order = false;
  Shape3 shape{};
  std::size_t data_offset = 0;  // bytes from file start to the payload
};

/// Parses the preamble and header dict of an in-memory .npy image. Only
/// version 1.0, little-endian float32/float64, C order and 3 dimensions are
/// accepted.
NpyHeader parse_npy_header(std::string_view bytes);

/// Loads a .npy file into a double-precision volume.
Volume3D read_npy(const std::filesystem::path& path);
Volume3D decode_npy(std::string_view bytes);

/// Serializes as .npy v1.0. The header block (magic through the trailing
/// newline) is padded to a multiple of 64 bytes.
std::string encode_npy(const Volume3D& volume, DType dtype);
void write_npy(const Volume3D& volume, const std::filesystem::path& path, DType dtype = DType::Float64);

struct ManifestEntry {
  std::string subject_id;
  std::string volume_path;
  double age_years = 0.0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path source_dir;  // relative volume paths resolve against this

  std::filesystem::path resolve(const ManifestEntry& e) const;
  const ManifestEntry* find(std::string_view subject_id) const;
};

/// CSV with a `subject_id,volume_path,age_years` header. Errors name the
/// offending 1-based line.
Manifest read_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view text);

}  // namespace msc
