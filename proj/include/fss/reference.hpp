#pragma once

#include "fss/metrics.hpp"
#include "fss/sampling.hpp"

/// Single-threaded versions of the OpenMP kernels. They share no code path
/// with the parallel combine logic and serve as the comparison baseline in
/// tests and benchmarks.
namespace fss::reference {

/// Cached farthest-first traversal, one thread, full mdf() per update.
FssTrace fss_traverse(const PackedStreamlines& packed, int k, InitRule rule);

/// Per-streamline voxelize() accumulated into one grid.
DensityMap density_map(const StreamlineSet& set, const VoxelMask& mask);

}  // namespace fss::reference
