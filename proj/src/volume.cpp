#include "fss/volume.hpp"

#include <algorithm>
#include <cmath>

#include "fss/error.hpp"

namespace fss {

namespace {

// Clamped so far-away or non-finite points map to an out-of-grid index instead of overflowing.
int cell_of(double p, double o, double s) {
  constexpr double kLimit = 1 << 30;
  const double c = std::floor((p - o) / s + 0.5);
  if (!(c > -kLimit)) return -(1 << 30);
  if (c > kLimit) return 1 << 30;
  return static_cast<int>(c);
}

}  // namespace

VoxelIndex GridFrame::voxel_of(Point3 p) const {
  return {cell_of(p.x, origin.x, voxel_size.x), cell_of(p.y, origin.y, voxel_size.y),
          cell_of(p.z, origin.z, voxel_size.z)};
}

std::optional<VoxelIndex> GridFrame::grid_voxel_of(Point3 p) const {
  if (!is_finite(p)) return std::nullopt;
  const auto v = voxel_of(p);
  if (!contains(v)) return std::nullopt;
  return v;
}

Point3 GridFrame::upper_corner() const {
  return lower_corner() + Point3{dims[0] * voxel_size.x, dims[1] * voxel_size.y, dims[2] * voxel_size.z};
}

double GridFrame::diagonal() const { return norm(upper_corner() - lower_corner()); }

namespace {

void check_frame(const GridFrame& f) {
  if (f.dims[0] <= 0 || f.dims[1] <= 0 || f.dims[2] <= 0) {
    throw Error(ErrorKind::invalid_spec, "grid dimensions must be positive");
  }
  if (!(f.voxel_size.x > 0 && f.voxel_size.y > 0 && f.voxel_size.z > 0)) {
    throw Error(ErrorKind::invalid_spec, "voxel size must be positive");
  }
  if (!is_finite(f.origin) || !is_finite(f.voxel_size)) {
    throw Error(ErrorKind::invalid_spec, "grid frame has non-finite values");
  }
}

}  // namespace

VoxelMask::VoxelMask(GridFrame frame) : frame_(frame) {
  check_frame(frame_);
  occupancy_.assign(frame_.voxel_count(), 0);
}

VoxelMask::VoxelMask(GridFrame frame, std::vector<std::uint8_t> occupancy)
    : frame_(frame), occupancy_(std::move(occupancy)) {
  check_frame(frame_);
  if (occupancy_.size() != frame_.voxel_count()) {
    throw Error(ErrorKind::format, "mask payload size does not match grid dimensions");
  }
}

std::size_t VoxelMask::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(occupancy_.begin(), occupancy_.end(), [](auto v) { return v != 0; }));
}

OrientationField::OrientationField(GridFrame frame) : frame_(frame) {
  check_frame(frame_);
  samples_.assign(frame_.voxel_count(), OrientationSample{});
}

const OrientationSample* OrientationField::lookup(Point3 p) const {
  const auto v = frame_.grid_voxel_of(p);
  if (!v) return nullptr;
  return &samples_[frame_.linear(*v)];
}

}  // namespace fss
