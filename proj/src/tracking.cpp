#include "fss/tracking.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fss/error.hpp"

namespace fss {

void validate(const TrackingConfig& cfg) {
  if (!(cfg.step_mm > 0.0)) throw Error(ErrorKind::config, "step_mm must be positive");
  if (!(cfg.max_angle_deg > 0.0 && cfg.max_angle_deg <= 180.0)) {
    throw Error(ErrorKind::config, "max_angle_deg must lie in (0, 180]");
  }
  if (!(cfg.fa_min > 0.0)) throw Error(ErrorKind::config, "fa_min must be positive");
  if (!(cfg.min_length_mm > 0.0)) throw Error(ErrorKind::config, "min_length_mm must be positive");
  if (!(cfg.max_extrap_fraction > 0.0 && cfg.max_extrap_fraction < 1.0)) {
    throw Error(ErrorKind::config, "max_extrap_fraction must lie in (0, 1)");
  }
  if (cfg.poly_order != 3) throw Error(ErrorKind::config, "poly_order must be 3");
  if (cfg.point_stride < 1) throw Error(ErrorKind::config, "point_stride must be at least 1");
}

namespace {

// Integration points after the seed, walking from `seed` with initial direction `dir`.
std::vector<Point3> half_track(const OrientationField& field, const VoxelMask& mask, Point3 seed, Point3 dir,
                               const TrackingConfig& cfg, std::size_t max_steps) {
  const double cos_gate = std::cos(cfg.max_angle_deg * M_PI / 180.0);
  std::vector<Point3> pts;
  Point3 p = seed;
  Point3 prev = dir;
  for (std::size_t n = 0; n < max_steps; ++n) {
    const auto* here = field.lookup(p);
    if (here == nullptr) break;
    Point3 d = here->direction;
    if (dot(d, prev) < 0.0) d = -d;
    if (dot(d, prev) < cos_gate) break;
    const Point3 next = p + d * cfg.step_mm;
    if (!mask.contains_point(next)) break;
    const auto* there = field.lookup(next);
    if (there == nullptr || there->fa < cfg.fa_min) break;
    pts.push_back(next);
    p = next;
    prev = d;
  }
  return pts;
}

}  // namespace

std::vector<Point3> track_seed(const OrientationField& field, const VoxelMask& mask, Point3 seed,
                               const TrackingConfig& cfg) {
  if (!mask.contains_point(seed)) return {};
  const auto* at_seed = field.lookup(seed);
  if (at_seed == nullptr || at_seed->fa < cfg.fa_min) return {};

  const auto max_steps = static_cast<std::size_t>(std::ceil(4.0 * mask.frame().diagonal() / cfg.step_mm));
  const Point3 d0 = at_seed->direction;
  const auto fwd = half_track(field, mask, seed, d0, cfg, max_steps);
  const auto bwd = half_track(field, mask, seed, -d0, cfg, max_steps);

  const double length = static_cast<double>(fwd.size() + bwd.size()) * cfg.step_mm;
  if (length < cfg.min_length_mm || length <= 0.0) return {};

  // Decimate on the seed-anchored grid of every point_stride-th step, keeping both ends.
  const auto stride = static_cast<std::size_t>(cfg.point_stride);
  std::vector<Point3> out;
  out.reserve((fwd.size() + bwd.size()) / stride + 3);
  for (std::size_t n = bwd.size(); n-- > 0;) {
    if (n + 1 == bwd.size() || (n + 1) % stride == 0) out.push_back(bwd[n]);
  }
  out.push_back(seed);
  for (std::size_t n = 0; n < fwd.size(); ++n) {
    if (n + 1 == fwd.size() || (n + 1) % stride == 0) out.push_back(fwd[n]);
  }
  return out;
}

TrackingResult track(const OrientationField& field, const VoxelMask& mask, const SeedSet& seeds,
                     const TrackingConfig& cfg) {
  validate(cfg);
  if (!(field.frame() == mask.frame())) {
    throw Error(ErrorKind::frame_mismatch, "orientation field and mask grids differ");
  }
  const auto n = static_cast<std::ptrdiff_t>(seeds.seeds.size());
  std::vector<std::vector<Point3>> tracks(seeds.seeds.size());
  std::vector<unsigned char> status(seeds.seeds.size(), 0);  // 0 ok/short, 1 outside, 2 low fa

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Point3 seed = seeds.seeds[static_cast<std::size_t>(i)];
    if (!mask.contains_point(seed)) {
      status[static_cast<std::size_t>(i)] = 1;
      continue;
    }
    const auto* s = field.lookup(seed);
    if (s == nullptr || s->fa < cfg.fa_min) {
      status[static_cast<std::size_t>(i)] = 2;
      continue;
    }
    tracks[static_cast<std::size_t>(i)] = track_seed(field, mask, seed, cfg);
  }

  TrackingResult result;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (status[i] == 1) {
      ++result.seeds_outside;
    } else if (status[i] == 2) {
      ++result.seeds_low_fa;
    } else if (tracks[i].empty()) {
      ++result.too_short;
    } else {
      result.set.streamlines.push_back({std::move(tracks[i]), static_cast<StreamlineId>(i)});
    }
  }
  return result;
}

PolyFit fit_poly3(const Streamline& s) {
  const auto n = static_cast<Eigen::Index>(s.points.size());
  if (n < 5) throw Error(ErrorKind::degenerate_geometry, "cubic fit needs at least 5 points");
  for (const auto& p : s.points) {
    if (!is_finite(p)) throw Error(ErrorKind::invalid_streamline, "non-finite coordinate in fit input");
  }
  Point3 lo = s.points.front();
  Point3 hi = s.points.front();
  for (const auto& p : s.points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  if (!(norm(hi - lo) > 1e-9)) {
    throw Error(ErrorKind::degenerate_geometry, "cubic fit input points are coincident");
  }

  // Centered parameter u = 2t - 1 keeps the Vandermonde matrix well conditioned.
  Eigen::MatrixXd basis(n, 4);
  Eigen::MatrixXd rhs(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    basis(i, 0) = 1.0;
    basis(i, 1) = u;
    basis(i, 2) = u * u;
    basis(i, 3) = u * u * u;
    const auto& p = s.points[static_cast<std::size_t>(i)];
    rhs(i, 0) = p.x;
    rhs(i, 1) = p.y;
    rhs(i, 2) = p.z;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < 4) throw Error(ErrorKind::degenerate_geometry, "rank-deficient cubic fit");
  const Eigen::MatrixXd coeffs = qr.solve(rhs);
  const Eigen::MatrixXd fitted = basis * coeffs;

  PolyFit out;
  out.streamline.id = s.id;
  out.streamline.points.resize(static_cast<std::size_t>(n));
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point3 q{fitted(i, 0), fitted(i, 1), fitted(i, 2)};
    out.streamline.points[static_cast<std::size_t>(i)] = q;
    const Point3 r = q - s.points[static_cast<std::size_t>(i)];
    sq += dot(r, r);
  }
  out.rms = std::sqrt(sq / static_cast<double>(n));
  return out;
}

double exit_distance(const VoxelMask& mask, Point3 p, Point3 dir, double max_distance) {
  const auto& f = mask.frame();
  VoxelIndex v = f.voxel_of(p);
  if (!mask.occupied(v)) return 0.0;

  const std::array<double, 3> pos{p.x, p.y, p.z};
  const std::array<double, 3> d{dir.x, dir.y, dir.z};
  const std::array<double, 3> size{f.voxel_size.x, f.voxel_size.y, f.voxel_size.z};
  const Point3 c = f.center(v);
  const std::array<double, 3> ctr{c.x, c.y, c.z};
  std::array<int, 3> cell{v.i, v.j, v.k};
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (ctr[a] + 0.5 * size[a] - pos[a]) / d[a];
      t_delta[a] = size[a] / d[a];
    } else if (d[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (ctr[a] - 0.5 * size[a] - pos[a]) / d[a];
      t_delta[a] = -size[a] / d[a];
    } else {
      step[a] = 0;
      t_max[a] = inf;
      t_delta[a] = inf;
    }
    t_max[a] = std::max(t_max[a], 0.0);
  }
  for (;;) {
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    const double t = t_max[a];
    if (!std::isfinite(t) || t > max_distance) return -1.0;
    cell[a] += step[a];
    if (!mask.occupied(VoxelIndex{cell[0], cell[1], cell[2]})) return t;
    t_max[a] += t_delta[a];
  }
}

namespace {

// Unit direction of the terminal segment leaving the polyline at `end` (0 = front, 1 = back).
std::optional<Point3> terminal_tangent(const std::vector<Point3>& pts, int end) {
  const std::size_t n = pts.size();
  const Point3 tip = end == 0 ? pts.front() : pts.back();
  for (std::size_t k = 1; k < n; ++k) {
    const Point3 q = end == 0 ? pts[k] : pts[n - 1 - k];
    const Point3 d = tip - q;
    const double len = norm(d);
    if (len > 1e-12) return d / len;
  }
  return std::nullopt;
}

}  // namespace

Extrapolation extrapolate_to_surface(const Streamline& s, const VoxelMask& mask, const TrackingConfig& cfg) {
  validate(s);
  const double original = arc_length(s);
  const double limit = 2.0 * mask.frame().diagonal();

  Extrapolation out;
  out.streamline = s;
  std::array<double, 2> added{0.0, 0.0};
  for (int end = 0; end < 2; ++end) {
    const auto tangent = terminal_tangent(s.points, end);
    if (!tangent) throw Error(ErrorKind::degenerate_geometry, "streamline has no terminal tangent");
    const Point3 tip = end == 0 ? s.points.front() : s.points.back();
    const double t = exit_distance(mask, tip, *tangent, limit);
    if (t < 0.0) {
      out.runaway = true;
      out.accepted = false;
      return out;
    }
    added[static_cast<std::size_t>(end)] = t;
  }
  if (added[0] > 0.0) {
    const Point3 tip = s.points.front();
    out.streamline.points.insert(out.streamline.points.begin(), tip + *terminal_tangent(s.points, 0) * added[0]);
  }
  if (added[1] > 0.0) {
    const Point3 tip = s.points.back();
    out.streamline.points.push_back(tip + *terminal_tangent(s.points, 1) * added[1]);
  }
  out.added_mm = added[0] + added[1];
  out.accepted = !(out.added_mm > cfg.max_extrap_fraction * original);
  return out;
}

StreamlineSet postprocess(const StreamlineSet& raw, const VoxelMask& mask, const TrackingConfig& cfg,
                          PostprocessStats* stats) {
  validate(cfg);
  const auto n = static_cast<std::ptrdiff_t>(raw.size());
  std::vector<std::optional<Streamline>> kept(raw.size());
  std::vector<unsigned char> why(raw.size(), 0);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = raw.streamlines[static_cast<std::size_t>(i)];
    try {
      const auto fit = fit_poly3(s);
      auto ext = extrapolate_to_surface(fit.streamline, mask, cfg);
      if (!ext.accepted) {
        why[static_cast<std::size_t>(i)] = 2;
      } else if (arc_length(ext.streamline) < cfg.min_length_mm) {
        why[static_cast<std::size_t>(i)] = 3;
      } else {
        kept[static_cast<std::size_t>(i)] = std::move(ext.streamline);
      }
    } catch (const Error&) {
      why[static_cast<std::size_t>(i)] = 1;
    }
  }

  StreamlineSet out;
  PostprocessStats local;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i]) {
      out.streamlines.push_back(std::move(*kept[i]));
    } else if (why[i] == 1) {
      ++local.fit_failed;
    } else if (why[i] == 3) {
      ++local.too_short;
    } else {
      ++local.extrapolation_rejected;
    }
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace fss
