#include "fss/reference.hpp"

#include <limits>
#include <string>

#include "fss/error.hpp"

namespace fss::reference {

FssTrace fss_traverse(const PackedStreamlines& packed, int k, InitRule rule) {
  const std::size_t n = packed.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::arity, "k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  std::vector<char> taken(n, 0);
  std::vector<double> cache(n, std::numeric_limits<double>::infinity());

  FssTrace trace;
  std::size_t current = initial_selection(packed, rule);
  double current_distance = std::numeric_limits<double>::infinity();
  for (int step = 0;; ++step) {
    taken[current] = 1;
    trace.ids.push_back(packed.ids[current]);
    trace.selection_distance.push_back(current_distance);
    if (step + 1 == k) break;

    std::size_t best = n;
    for (std::size_t r = 0; r < n; ++r) {
      if (taken[r]) continue;
      const double d = mdf(packed[r], packed[current]);
      if (d < cache[r]) cache[r] = d;
      if (best == n || cache[r] > cache[best] || (cache[r] == cache[best] && packed.ids[r] < packed.ids[best])) {
        best = r;
      }
    }
    current = best;
    current_distance = cache[best];
  }
  return trace;
}

DensityMap density_map(const StreamlineSet& set, const VoxelMask& mask) {
  DensityMap map;
  map.frame = mask.frame();
  map.counts.assign(map.frame.voxel_count(), 0);
  for (const auto& s : set.streamlines) {
    for (auto idx : voxelize(s, mask)) ++map.counts[idx];
  }
  return map;
}

}  // namespace fss::reference
