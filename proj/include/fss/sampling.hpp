#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fss/streamline.hpp"
#include "fss/volume.hpp"

namespace fss {

enum class SeedStrategy { slices_2d, volume_3d };

struct SeedSet {
  std::vector<Point3> seeds;
  SeedStrategy strategy = SeedStrategy::volume_3d;
};

/// Regular world-space lattice at `spacing_mm`, anchored at the center of
/// voxel (0,0,0) and clipped to occupied voxels. Ordered x-fastest.
/// A spacing that divides the voxel size always hits every voxel center.
SeedSet seeds_3d(const VoxelMask& mask, double spacing_mm);

/// Axis (0, 1, 2) along which the occupied voxels extend furthest in mm; ties go to the higher axis.
int longitudinal_axis(const VoxelMask& mask);

/// round(first + (last - first) * i / (n - 1)) for i in [0, n).
std::vector<int> evenly_spaced_slices(int first, int last, int n_slices);

/// Seeds on `n_slices` slices evenly spaced along the longitudinal axis.
/// Every occupied voxel in a chosen slice receives a `divisions`^2 in-plane
/// sub-lattice; divisions = 1 gives one seed at each voxel center.
SeedSet seeds_2d(const VoxelMask& mask, int n_slices = 5, int divisions = 1,
                 std::optional<int> axis = std::nullopt);

enum class InitRule { longest, index };

struct FssConfig {
  int n_candidates = 10000;
  int k = 3000;
  int m = kDefaultResampleCount;
  InitRule init_rule = InitRule::longest;
};

/// Selection order and, per step, the distance from the chosen streamline to
/// the already-selected set. The first entry is +infinity.
struct FssTrace {
  std::vector<StreamlineId> ids;
  std::vector<double> selection_distance;
};

struct FssResult {
  StreamlineSet selected;
  FssTrace trace;
};

/// Resampled streamlines stored contiguously, `m` points per streamline.
struct PackedStreamlines {
  int m = kDefaultResampleCount;
  std::vector<Point3> points;
  std::vector<StreamlineId> ids;
  std::vector<double> lengths;  ///< arc length of the source streamline

  std::size_t size() const { return ids.size(); }
  std::span<const Point3> operator[](std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(m), static_cast<std::size_t>(m)};
  }
};

PackedStreamlines pack(const StreamlineSet& set, int m);

/// Index (into `packed`) of the first selection under `rule`.
std::size_t initial_selection(const PackedStreamlines& packed, InitRule rule);

/// Farthest-first traversal under MDF with cached per-candidate minimum
/// distances; O(n k) distance evaluations. The distance update and argmax
/// pass runs under OpenMP. Ties go to the lowest id, so the result does not
/// depend on the thread count.
FssResult fss_filter(const StreamlineSet& candidates, const FssConfig& cfg);

/// Traversal over already-packed streamlines; returns indices into `packed`.
FssTrace fss_traverse(const PackedStreamlines& packed, int k, InitRule rule,
                      std::vector<std::size_t>* order = nullptr);

}  // namespace fss
