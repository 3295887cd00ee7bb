#include "fss/sampling.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fss/error.hpp"

namespace fss {

namespace {

void require_nonempty(const VoxelMask& mask) {
  if (mask.occupied_count() == 0) throw Error(ErrorKind::empty_domain, "mask has no occupied voxels");
}

double axis_value(Point3 p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

}  // namespace

SeedSet seeds_3d(const VoxelMask& mask, double spacing_mm) {
  if (!(spacing_mm > 0.0) || !std::isfinite(spacing_mm)) {
    throw Error(ErrorKind::config, "seed spacing must be positive");
  }
  require_nonempty(mask);
  const auto& f = mask.frame();
  const Point3 lo = f.lower_corner();
  const Point3 hi = f.upper_corner();

  // Lattice offsets a such that origin + a * spacing lies in [lo, hi).
  auto range = [&](int axis) {
    const double o = axis_value(f.origin, axis);
    const auto first = static_cast<long>(std::ceil((axis_value(lo, axis) - o) / spacing_mm));
    const auto last = static_cast<long>(std::ceil((axis_value(hi, axis) - o) / spacing_mm)) - 1;
    return std::pair{first, last};
  };
  const auto [x0, x1] = range(0);
  const auto [y0, y1] = range(1);
  const auto [z0, z1] = range(2);

  SeedSet out;
  out.strategy = SeedStrategy::volume_3d;
  for (long c = z0; c <= z1; ++c) {
    for (long b = y0; b <= y1; ++b) {
      for (long a = x0; a <= x1; ++a) {
        const Point3 p{f.origin.x + static_cast<double>(a) * spacing_mm,
                       f.origin.y + static_cast<double>(b) * spacing_mm,
                       f.origin.z + static_cast<double>(c) * spacing_mm};
        if (mask.contains_point(p)) out.seeds.push_back(p);
      }
    }
  }
  return out;
}

int longitudinal_axis(const VoxelMask& mask) {
  require_nonempty(mask);
  const auto& f = mask.frame();
  std::array<int, 3> lo{f.dims[0], f.dims[1], f.dims[2]};
  std::array<int, 3> hi{-1, -1, -1};
  for (std::size_t idx = 0; idx < f.voxel_count(); ++idx) {
    if (!mask.occupied(idx)) continue;
    const auto v = f.unlinear(idx);
    const std::array<int, 3> c{v.i, v.j, v.k};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  const std::array<double, 3> size{f.voxel_size.x, f.voxel_size.y, f.voxel_size.z};
  int best = 2;
  double best_extent = -1.0;
  for (int a = 2; a >= 0; --a) {
    const double extent = (hi[a] - lo[a] + 1) * size[a];
    if (extent > best_extent) {
      best_extent = extent;
      best = a;
    }
  }
  return best;
}

std::vector<int> evenly_spaced_slices(int first, int last, int n_slices) {
  if (n_slices < 1) throw Error(ErrorKind::config, "slice count must be at least 1");
  if (n_slices == 1) return {static_cast<int>(std::lround(0.5 * (first + last)))};
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n_slices));
  for (int i = 0; i < n_slices; ++i) {
    const double pos = first + static_cast<double>(last - first) * i / (n_slices - 1);
    out.push_back(static_cast<int>(std::lround(pos)));
  }
  return out;
}

SeedSet seeds_2d(const VoxelMask& mask, int n_slices, int divisions, std::optional<int> axis) {
  if (divisions < 1) throw Error(ErrorKind::config, "in-plane divisions must be at least 1");
  require_nonempty(mask);
  const int ax = axis.value_or(longitudinal_axis(mask));
  if (ax < 0 || ax > 2) throw Error(ErrorKind::config, "slice axis must be 0, 1 or 2");
  const auto& f = mask.frame();

  std::vector<char> slice_used(static_cast<std::size_t>(f.dims[ax]), 0);
  for (std::size_t idx = 0; idx < f.voxel_count(); ++idx) {
    if (!mask.occupied(idx)) continue;
    const auto v = f.unlinear(idx);
    slice_used[static_cast<std::size_t>(ax == 0 ? v.i : (ax == 1 ? v.j : v.k))] = 1;
  }
  std::vector<int> occupied;
  for (int s = 0; s < f.dims[ax]; ++s) {
    if (slice_used[static_cast<std::size_t>(s)]) occupied.push_back(s);
  }
  if (static_cast<int>(occupied.size()) < n_slices) {
    throw Error(ErrorKind::insufficient_extent, "mask occupies " + std::to_string(occupied.size()) +
                                                    " slices, fewer than the " + std::to_string(n_slices) +
                                                    " requested");
  }
  const auto slices = evenly_spaced_slices(occupied.front(), occupied.back(), n_slices);

  // In-plane offsets, in voxel units, of a divisions x divisions sub-lattice centered on the voxel.
  std::vector<double> offs;
  for (int a = 0; a < divisions; ++a) offs.push_back((a + 0.5) / divisions - 0.5);

  SeedSet out;
  out.strategy = SeedStrategy::slices_2d;
  const int u_axis = ax == 0 ? 1 : 0;
  const int v_axis = ax == 2 ? 1 : 2;
  const std::array<double, 3> size{f.voxel_size.x, f.voxel_size.y, f.voxel_size.z};
  for (int s : slices) {
    for (int b = 0; b < f.dims[v_axis]; ++b) {
      for (int a = 0; a < f.dims[u_axis]; ++a) {
        std::array<int, 3> c{};
        c[ax] = s;
        c[u_axis] = a;
        c[v_axis] = b;
        const VoxelIndex vi{c[0], c[1], c[2]};
        if (!mask.occupied(vi)) continue;
        const Point3 center = f.center(vi);
        for (double ov : offs) {
          for (double ou : offs) {
            std::array<double, 3> d{0.0, 0.0, 0.0};
            d[u_axis] = ou * size[u_axis];
            d[v_axis] = ov * size[v_axis];
            out.seeds.push_back(center + Point3{d[0], d[1], d[2]});
          }
        }
      }
    }
  }
  return out;
}

PackedStreamlines pack(const StreamlineSet& set, int m) {
  if (m < 2) throw Error(ErrorKind::arity, "resample count must be at least 2");
  PackedStreamlines packed;
  packed.m = m;
  const std::size_t n = set.size();
  packed.points.resize(n * static_cast<std::size_t>(m));
  packed.ids.resize(n);
  packed.lengths.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = set.streamlines[i];
    const auto r = resample(s, m);
    std::copy(r.points.begin(), r.points.end(), packed.points.begin() + static_cast<std::ptrdiff_t>(i * m));
    packed.ids[i] = s.id;
    packed.lengths[i] = arc_length(s);
  }
  return packed;
}

std::size_t initial_selection(const PackedStreamlines& packed, InitRule rule) {
  if (packed.size() == 0) throw Error(ErrorKind::arity, "no candidates to select from");
  if (rule == InitRule::index) return 0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < packed.size(); ++i) {
    const double li = packed.lengths[i];
    const double lb = packed.lengths[best];
    if (li > lb || (li == lb && packed.ids[i] < packed.ids[best])) best = i;
  }
  return best;
}

namespace {

struct Best {
  double distance = -1.0;
  StreamlineId id = std::numeric_limits<StreamlineId>::max();
  std::size_t slot = 0;

  bool beats(const Best& o) const { return distance > o.distance || (distance == o.distance && id < o.id); }
};

}  // namespace

FssTrace fss_traverse(const PackedStreamlines& packed, int k, InitRule rule, std::vector<std::size_t>* order) {
  const std::size_t n = packed.size();
  if (n == 0) throw Error(ErrorKind::arity, "fss requires at least one candidate");
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::arity, "k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }

  std::vector<std::size_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = i;
  std::vector<double> cache(n, std::numeric_limits<double>::infinity());

  FssTrace trace;
  trace.ids.reserve(static_cast<std::size_t>(k));
  trace.selection_distance.reserve(static_cast<std::size_t>(k));
  if (order) {
    order->clear();
    order->reserve(static_cast<std::size_t>(k));
  }

  std::size_t current = initial_selection(packed, rule);
  double current_distance = std::numeric_limits<double>::infinity();
  std::swap(remaining[current], remaining.back());
  remaining.pop_back();

  const int threads = omp_get_max_threads();
  std::vector<Best> partial(static_cast<std::size_t>(threads));

  for (int step = 0;; ++step) {
    trace.ids.push_back(packed.ids[current]);
    trace.selection_distance.push_back(current_distance);
    if (order) order->push_back(current);
    if (step + 1 == k) break;

    const auto selected = packed[current];
    const auto count = static_cast<std::ptrdiff_t>(remaining.size());
    std::fill(partial.begin(), partial.end(), Best{});

#pragma omp parallel num_threads(threads)
    {
      Best local;
#pragma omp for schedule(static)
      for (std::ptrdiff_t slot = 0; slot < count; ++slot) {
        const std::size_t r = remaining[static_cast<std::size_t>(slot)];
        const double d = mdf_bounded(packed[r], selected, cache[r]);
        if (d < cache[r]) cache[r] = d;
        const Best cand{cache[r], packed.ids[r], static_cast<std::size_t>(slot)};
        if (cand.beats(local)) local = cand;
      }
      partial[static_cast<std::size_t>(omp_get_thread_num())] = local;
    }

    Best best;
    for (const auto& b : partial) {
      if (b.distance >= 0.0 && b.beats(best)) best = b;
    }
    current = remaining[best.slot];
    current_distance = best.distance;
    remaining[best.slot] = remaining.back();
    remaining.pop_back();
  }
  return trace;
}

FssResult fss_filter(const StreamlineSet& candidates, const FssConfig& cfg) {
  if (candidates.empty()) throw Error(ErrorKind::arity, "fss requires at least one candidate");
  validate_unique_ids(candidates);
  const auto packed = pack(candidates, cfg.m);
  std::vector<std::size_t> order;
  FssResult result;
  result.trace = fss_traverse(packed, cfg.k, cfg.init_rule, &order);
  result.selected.streamlines.reserve(order.size());
  for (auto i : order) result.selected.streamlines.push_back(candidates.streamlines[i]);
  return result;
}

}  // namespace fss
