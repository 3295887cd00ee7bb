#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fss/point.hpp"

namespace fss {

using StreamlineId = std::int64_t;

/// Ordered polyline in world millimeters.
struct Streamline {
  std::vector<Point3> points;
  StreamlineId id = 0;

  friend bool operator==(const Streamline&, const Streamline&) = default;
};

/// Fixed-count, arc-length-uniform copy of a streamline. Operand of mdf().
struct ResampledStreamline {
  std::vector<Point3> points;
  StreamlineId source_id = 0;
};

struct StreamlineSet {
  std::vector<Streamline> streamlines;

  std::size_t size() const { return streamlines.size(); }
  bool empty() const { return streamlines.empty(); }
};

inline constexpr int kDefaultResampleCount = 12;

/// Throws invalid_streamline when fewer than two points, a non-finite coordinate, or zero length.
void validate(const Streamline& s);

/// Throws invalid_spec when ids repeat.
void validate_unique_ids(const StreamlineSet& set);

double arc_length(const Streamline& s);
double arc_length(std::span<const Point3> points);

/// m points at equal arc-length spacing along the piecewise-linear curve.
/// Endpoints are copied, not interpolated.
ResampledStreamline resample(const Streamline& s, int m = kDefaultResampleCount);

ResampledStreamline flip(const ResampledStreamline& r);
Streamline flip(const Streamline& s);

/// Minimum average direct-flip distance. Throws arity when point counts differ.
///
/// Both orientation sums are accumulated over mirrored index pairs (i, m-1-i),
/// so mdf(a, b) and mdf(b, a) perform bit-identical arithmetic, and flipping
/// either operand only swaps the direct and flipped sums.
double mdf(const ResampledStreamline& a, const ResampledStreamline& b);

/// Same as mdf() on raw point spans of equal length m.
double mdf(std::span<const Point3> a, std::span<const Point3> b);

/// mdf() with early exit: returns exactly mdf(a, b) whenever that value is
/// below `bound`; otherwise returns some value >= bound.
double mdf_bounded(std::span<const Point3> a, std::span<const Point3> b, double bound);

}  // namespace fss
