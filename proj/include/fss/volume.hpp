#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fss/point.hpp"

namespace fss {

struct VoxelIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  friend constexpr bool operator==(VoxelIndex, VoxelIndex) = default;
};

/// Axis-aligned voxel grid. `origin` is the world position of the center of
/// voxel (0,0,0); voxel (i,j,k) covers the half-open box
/// [center - size/2, center + size/2) on every axis.
struct GridFrame {
  std::array<int, 3> dims{1, 1, 1};
  Point3 voxel_size{1.0, 1.0, 1.0};
  Point3 origin{0.5, 0.5, 0.5};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  double voxel_volume() const { return voxel_size.x * voxel_size.y * voxel_size.z; }

  /// x-fastest linear index.
  std::size_t linear(VoxelIndex v) const {
    return static_cast<std::size_t>(v.i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(v.j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(v.k));
  }
  VoxelIndex unlinear(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
  }
  bool contains(VoxelIndex v) const {
    return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < dims[0] && v.j < dims[1] && v.k < dims[2];
  }

  Point3 center(VoxelIndex v) const {
    return {origin.x + v.i * voxel_size.x, origin.y + v.j * voxel_size.y, origin.z + v.k * voxel_size.z};
  }
  /// Voxel whose half-open box holds `p`; may lie outside the grid.
  VoxelIndex voxel_of(Point3 p) const;
  std::optional<VoxelIndex> grid_voxel_of(Point3 p) const;

  /// World-space corners of the grid box.
  Point3 lower_corner() const { return origin - voxel_size * 0.5; }
  Point3 upper_corner() const;
  double diagonal() const;

  friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

/// Binary muscle mask.
class VoxelMask {
 public:
  VoxelMask() = default;
  explicit VoxelMask(GridFrame frame);
  VoxelMask(GridFrame frame, std::vector<std::uint8_t> occupancy);

  const GridFrame& frame() const { return frame_; }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  bool occupied(VoxelIndex v) const { return frame_.contains(v) && occupancy_[frame_.linear(v)] != 0; }
  bool occupied(std::size_t linear_index) const { return occupancy_[linear_index] != 0; }
  bool contains_point(Point3 p) const { return occupied(frame_.voxel_of(p)); }
  void set(VoxelIndex v, bool value) { occupancy_[frame_.linear(v)] = value ? 1 : 0; }

  std::size_t occupied_count() const;

  friend bool operator==(const VoxelMask&, const VoxelMask&) = default;

 private:
  GridFrame frame_;
  std::vector<std::uint8_t> occupancy_;
};

/// Per-voxel unit direction and anisotropy; stands in for the principal
/// diffusion direction. Directions are axial (sign carries no meaning).
struct OrientationSample {
  Point3 direction;
  double fa = 0.0;
};

class OrientationField {
 public:
  OrientationField() = default;
  explicit OrientationField(GridFrame frame);

  const GridFrame& frame() const { return frame_; }
  const OrientationSample& at(VoxelIndex v) const { return samples_[frame_.linear(v)]; }
  const OrientationSample& at(std::size_t linear_index) const { return samples_[linear_index]; }
  void set(VoxelIndex v, OrientationSample s) { samples_[frame_.linear(v)] = s; }
  void set(std::size_t linear_index, OrientationSample s) { samples_[linear_index] = s; }
  const std::vector<OrientationSample>& samples() const { return samples_; }

  /// Nearest-voxel lookup; nullptr outside the grid.
  const OrientationSample* lookup(Point3 p) const;

 private:
  GridFrame frame_;
  std::vector<OrientationSample> samples_;
};

}  // namespace fss
