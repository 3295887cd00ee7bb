#pragma once

#include <cstddef>
#include <vector>

#include "fss/sampling.hpp"
#include "fss/streamline.hpp"
#include "fss/volume.hpp"

namespace fss {

struct TrackingConfig {
  double step_mm = 0.1;
  double max_angle_deg = 10.0;
  double fa_min = 0.1;
  double min_length_mm = 10.0;
  double max_extrap_fraction = 0.30;
  int poly_order = 3;
  /// Keep every n-th integration point (plus both ends) in the emitted polyline.
  int point_stride = 5;
};

/// Throws config on any out-of-range field.
void validate(const TrackingConfig& cfg);

struct TrackingResult {
  StreamlineSet set;                 ///< ids are seed indices, in seed order
  std::size_t seeds_outside = 0;     ///< seed not in the mask, skipped
  std::size_t seeds_low_fa = 0;      ///< seed voxel below fa_min
  std::size_t too_short = 0;         ///< discarded below min_length_mm
};

/// Bidirectional deterministic Euler tracking with nearest-voxel lookup.
/// Each step takes the field vector sign-aligned with the previous step and
/// stops on the angle gate, fa < fa_min, or leaving the mask. Parallel over
/// seeds; output order does not depend on scheduling.
TrackingResult track(const OrientationField& field, const VoxelMask& mask, const SeedSet& seeds,
                     const TrackingConfig& cfg);

/// Single seed; empty polyline when nothing is emitted.
std::vector<Point3> track_seed(const OrientationField& field, const VoxelMask& mask, Point3 seed,
                               const TrackingConfig& cfg);

struct PolyFit {
  Streamline streamline;
  double rms = 0.0;  ///< root-mean-square point residual, mm
};

/// Least-squares cubic per coordinate against the normalized sample index
/// t_i = i / (n - 1), evaluated back at the same t_i. For uniformly stepped
/// tracks t is the normalized arc length. Needs at least 5 points.
PolyFit fit_poly3(const Streamline& s);

/// Distance along `dir` (unit) from `p` to the first boundary where the ray
/// enters an unoccupied voxel. 0 when `p` itself is outside the mask.
/// Returns a negative value when no exit occurs within `max_distance`.
double exit_distance(const VoxelMask& mask, Point3 p, Point3 dir, double max_distance);

struct Extrapolation {
  Streamline streamline;
  bool accepted = false;
  bool runaway = false;
  double added_mm = 0.0;
};

/// Extends both ends along their terminal tangents to the mask surface.
/// Rejected when the added length exceeds max_extrap_fraction of the original.
Extrapolation extrapolate_to_surface(const Streamline& s, const VoxelMask& mask, const TrackingConfig& cfg);

struct PostprocessStats {
  std::size_t fit_failed = 0;
  std::size_t extrapolation_rejected = 0;
  std::size_t too_short = 0;  ///< below min_length_mm after fitting
};

/// Cubic fit then surface extrapolation; keeps accepted tracks that still meet
/// min_length_mm, ids preserved.
StreamlineSet postprocess(const StreamlineSet& raw, const VoxelMask& mask, const TrackingConfig& cfg,
                          PostprocessStats* stats = nullptr);

}  // namespace fss
