#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fss/streamline.hpp"
#include "fss/volume.hpp"

namespace fss {

/// Scalar float32 volume on a mask grid (magic "DENS").
struct DensityVolume {
  GridFrame frame;
  std::vector<float> values;
};

// Binary codecs. All formats are little-endian, version 1.
//   STRL: magic, version, count, then per streamline npoints + npoints x 3 float32.
//   MSKV: magic, version, dims 3 x u32, voxel_size 3 x f32, origin 3 x f32, one byte per voxel.
//   ORNT: MSKV header, 4 x f32 per voxel (dx, dy, dz, fa).
//   DENS: MSKV header, 1 x f32 per voxel.
// Voxel payloads are x-fastest. Decoders throw format on any inconsistency.
// Streamline ids are not stored; decoding assigns ids 0..n-1 in file order.

std::string encode_streamlines(const StreamlineSet& set);
StreamlineSet decode_streamlines(std::string_view bytes);

std::string encode_mask(const VoxelMask& mask);
VoxelMask decode_mask(std::string_view bytes);

std::string encode_field(const OrientationField& field);
OrientationField decode_field(std::string_view bytes);

std::string encode_density(const DensityVolume& volume);
DensityVolume decode_density(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

StreamlineSet load_streamlines(const std::filesystem::path& path);
VoxelMask load_mask(const std::filesystem::path& path);
OrientationField load_field(const std::filesystem::path& path);
DensityVolume load_density(const std::filesystem::path& path);

void save_streamlines(const std::filesystem::path& path, const StreamlineSet& set);
void save_mask(const std::filesystem::path& path, const VoxelMask& mask);
void save_field(const std::filesystem::path& path, const OrientationField& field);
void save_density(const std::filesystem::path& path, const DensityVolume& volume);

/// Streamline files carry no grid, so a set belongs to a mask when every
/// point lies within one voxel of the grid box. Throws frame_mismatch otherwise.
void check_frame(const StreamlineSet& set, const VoxelMask& mask);

/// Fixed 9-significant-digit float formatting used by every CSV output.
std::string format_number(double v);

/// Minimal CSV table with a header row and fixed column order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Splits CSV text into rows of fields. Quoting is not supported; blank lines
/// and lines starting with '#' are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace fss
