#pragma once

#include <cstdint>
#include <vector>

#include "fss/streamline.hpp"
#include "fss/volume.hpp"

namespace fss {

/// Sorted, unique linear indices of occupied voxels the polyline passes
/// through. Each segment is traversed exactly (grid DDA), which is the
/// limit of a point walk as the walk step goes to zero.
std::vector<std::size_t> voxelize(const Streamline& s, const VoxelMask& mask);

/// Distinct-streamline count per voxel; zero outside the mask.
struct DensityMap {
  GridFrame frame;
  std::vector<std::uint32_t> counts;

  std::uint32_t max_count() const;
  /// counts / max over the mask; all zeros when nothing is crossed.
  std::vector<float> normalized() const;
};

enum class SdcvSupport { all, nonzero };

struct TractMetrics {
  double sc = 0.0;
  double sd_mean = 0.0;
  double sdcv = 0.0;
  bool sdcv_defined = true;  ///< false when sd_mean == 0; sdcv is then NaN
};

/// |union of voxelizations| / |occupied voxels|. Throws empty_domain for an empty mask.
double coverage(const StreamlineSet& set, const VoxelMask& mask);

struct DensityResult {
  DensityMap map;
  TractMetrics metrics;
};

/// Streamline density map and SC / SD / SDCV. Population standard deviation.
/// `support` selects the voxels that enter the SD statistics: every occupied
/// voxel, or only those crossed at least once.
DensityResult density(const StreamlineSet& set, const VoxelMask& mask, SdcvSupport support = SdcvSupport::all);

/// SC / SD / SDCV from an existing density map.
TractMetrics metrics_from_counts(const DensityMap& map, const VoxelMask& mask, SdcvSupport support);

}  // namespace fss
