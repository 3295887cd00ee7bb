#include "fss/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fss/error.hpp"

namespace fss {

namespace {

void require_nonempty(const VoxelMask& mask) {
  if (mask.occupied_count() == 0) throw Error(ErrorKind::empty_domain, "mask has no occupied voxels");
}

template <typename Visit>
void traverse_segment(const GridFrame& f, Point3 p0, Point3 p1, Visit&& visit) {
  const VoxelIndex v0 = f.voxel_of(p0);
  visit(v0);
  const Point3 d = p1 - p0;
  const std::array<double, 3> pos{p0.x, p0.y, p0.z};
  const std::array<double, 3> dir{d.x, d.y, d.z};
  const std::array<double, 3> size{f.voxel_size.x, f.voxel_size.y, f.voxel_size.z};
  const Point3 c = f.center(v0);
  const std::array<double, 3> ctr{c.x, c.y, c.z};
  std::array<int, 3> cell{v0.i, v0.j, v0.k};
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (ctr[a] + 0.5 * size[a] - pos[a]) / dir[a];
      t_delta[a] = size[a] / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (ctr[a] - 0.5 * size[a] - pos[a]) / dir[a];
      t_delta[a] = -size[a] / dir[a];
    } else {
      t_max[a] = inf;
      t_delta[a] = inf;
    }
    t_max[a] = std::max(t_max[a], 0.0);
  }
  for (;;) {
    const double t = std::min({t_max[0], t_max[1], t_max[2]});
    if (!(t < 1.0)) break;
    // Axes crossed at the same parameter step together, so edge and corner
    // touches do not visit a voxel the segment has no interior point in.
    for (int a = 0; a < 3; ++a) {
      if (t_max[a] == t) {
        cell[a] += step[a];
        t_max[a] += t_delta[a];
      }
    }
    visit(VoxelIndex{cell[0], cell[1], cell[2]});
  }
  visit(f.voxel_of(p1));
}

// Visits each occupied voxel of `s` once; `scratch` holds the last id seen per voxel.
template <typename Emit>
void for_each_voxel(const Streamline& s, const VoxelMask& mask, std::vector<std::int64_t>& scratch,
                    std::int64_t tag, Emit&& emit) {
  const auto& f = mask.frame();
  auto visit = [&](VoxelIndex v) {
    if (!mask.occupied(v)) return;
    const std::size_t idx = f.linear(v);
    if (scratch[idx] == tag) return;
    scratch[idx] = tag;
    emit(idx);
  };
  if (s.points.size() == 1) {
    visit(f.voxel_of(s.points.front()));
    return;
  }
  for (std::size_t i = 1; i < s.points.size(); ++i) traverse_segment(f, s.points[i - 1], s.points[i], visit);
}

}  // namespace

std::vector<std::size_t> voxelize(const Streamline& s, const VoxelMask& mask) {
  std::vector<std::size_t> out;
  if (s.points.empty()) return out;
  std::vector<std::int64_t> scratch(mask.frame().voxel_count(), -1);
  for_each_voxel(s, mask, scratch, 0, [&](std::size_t idx) { out.push_back(idx); });
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t DensityMap::max_count() const {
  return counts.empty() ? 0u : *std::max_element(counts.begin(), counts.end());
}

std::vector<float> DensityMap::normalized() const {
  const auto peak = max_count();
  std::vector<float> out(counts.size(), 0.0f);
  if (peak == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(counts[i]) / static_cast<double>(peak));
  }
  return out;
}

double coverage(const StreamlineSet& set, const VoxelMask& mask) {
  require_nonempty(mask);
  const auto& f = mask.frame();
  std::vector<std::int64_t> scratch(f.voxel_count(), -1);
  std::vector<char> hit(f.voxel_count(), 0);
  std::int64_t tag = 0;
  for (const auto& s : set.streamlines) {
    if (s.points.empty()) continue;
    for_each_voxel(s, mask, scratch, tag++, [&](std::size_t idx) { hit[idx] = 1; });
  }
  const auto crossed = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  return static_cast<double>(crossed) / static_cast<double>(mask.occupied_count());
}

TractMetrics metrics_from_counts(const DensityMap& map, const VoxelMask& mask, SdcvSupport support) {
  require_nonempty(mask);
  std::size_t occupied = 0;
  std::size_t crossed = 0;
  std::size_t n = 0;
  std::uint64_t total = 0;
  for (std::size_t idx = 0; idx < map.counts.size(); ++idx) {
    if (!mask.occupied(idx)) continue;
    ++occupied;
    const auto c = map.counts[idx];
    if (c > 0) ++crossed;
    if (support == SdcvSupport::all || c > 0) {
      ++n;
      total += c;
    }
  }
  TractMetrics m;
  m.sc = static_cast<double>(crossed) / static_cast<double>(occupied);
  m.sd_mean = n > 0 ? static_cast<double>(total) / static_cast<double>(n) : 0.0;
  if (n == 0 || m.sd_mean == 0.0) {
    m.sdcv = std::numeric_limits<double>::quiet_NaN();
    m.sdcv_defined = false;
    return m;
  }
  double sq = 0.0;
  for (std::size_t idx = 0; idx < map.counts.size(); ++idx) {
    if (!mask.occupied(idx)) continue;
    const auto c = map.counts[idx];
    if (support == SdcvSupport::nonzero && c == 0) continue;
    const double dev = static_cast<double>(c) - m.sd_mean;
    sq += dev * dev;
  }
  m.sdcv = std::sqrt(sq / static_cast<double>(n)) / m.sd_mean;
  return m;
}

DensityResult density(const StreamlineSet& set, const VoxelMask& mask, SdcvSupport support) {
  require_nonempty(mask);
  const auto& f = mask.frame();
  const std::size_t voxels = f.voxel_count();
  const auto n = static_cast<std::ptrdiff_t>(set.size());

  DensityResult out;
  out.map.frame = f;
  out.map.counts.assign(voxels, 0);

#pragma omp parallel
  {
    std::vector<std::uint32_t> local(voxels, 0);
    std::vector<std::int64_t> scratch(voxels, -1);
#pragma omp for schedule(dynamic, 64) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& s = set.streamlines[static_cast<std::size_t>(i)];
      if (s.points.empty()) continue;
      for_each_voxel(s, mask, scratch, i, [&](std::size_t idx) { ++local[idx]; });
    }
#pragma omp critical(fss_density_merge)
    for (std::size_t v = 0; v < voxels; ++v) out.map.counts[v] += local[v];
  }

  out.metrics = metrics_from_counts(out.map, mask, support);
  return out;
}

}  // namespace fss
