#include "fss/streamline.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "fss/error.hpp"

namespace fss {

void validate(const Streamline& s) {
  if (s.points.size() < 2) {
    throw Error(ErrorKind::invalid_streamline,
                "streamline " + std::to_string(s.id) + " has fewer than two points");
  }
  for (const auto& p : s.points) {
    if (!is_finite(p)) {
      throw Error(ErrorKind::invalid_streamline,
                  "streamline " + std::to_string(s.id) + " has a non-finite coordinate");
    }
  }
  if (!(arc_length(s.points) > 0.0)) {
    throw Error(ErrorKind::invalid_streamline,
                "streamline " + std::to_string(s.id) + " has zero length");
  }
}

void validate_unique_ids(const StreamlineSet& set) {
  std::unordered_set<StreamlineId> seen;
  seen.reserve(set.size());
  for (const auto& s : set.streamlines) {
    if (!seen.insert(s.id).second) {
      throw Error(ErrorKind::invalid_spec, "duplicate streamline id " + std::to_string(s.id));
    }
  }
}

double arc_length(std::span<const Point3> points) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i], points[i - 1]);
  return total;
}

double arc_length(const Streamline& s) {
  if (s.points.size() < 2) {
    throw Error(ErrorKind::invalid_streamline,
                "streamline " + std::to_string(s.id) + " has fewer than two points");
  }
  return arc_length(s.points);
}

ResampledStreamline resample(const Streamline& s, int m) {
  if (m < 2) throw Error(ErrorKind::arity, "resample count must be at least 2");
  validate(s);

  const auto& pts = s.points;
  std::vector<double> cumulative(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + distance(pts[i], pts[i - 1]);
  }
  const double total = cumulative.back();

  ResampledStreamline out;
  out.source_id = s.id;
  out.points.reserve(static_cast<std::size_t>(m));
  out.points.push_back(pts.front());

  std::size_t seg = 0;
  for (int j = 1; j < m - 1; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(m - 1);
    while (seg + 2 < pts.size() && cumulative[seg + 1] < target) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double f = seg_len > 0.0 ? std::clamp((target - cumulative[seg]) / seg_len, 0.0, 1.0) : 0.0;
    out.points.push_back(pts[seg] + (pts[seg + 1] - pts[seg]) * f);
  }
  out.points.push_back(pts.back());
  return out;
}

ResampledStreamline flip(const ResampledStreamline& r) {
  ResampledStreamline out{r.points, r.source_id};
  std::reverse(out.points.begin(), out.points.end());
  return out;
}

Streamline flip(const Streamline& s) {
  Streamline out{s.points, s.id};
  std::reverse(out.points.begin(), out.points.end());
  return out;
}

namespace {

struct PairSums {
  double direct = 0.0;
  double flipped = 0.0;
};

inline void accumulate_pair(std::span<const Point3> a, std::span<const Point3> b, std::size_t i,
                            std::size_t j, PairSums& sums) {
  sums.direct += distance(a[i], b[i]) + distance(a[j], b[j]);
  sums.flipped += distance(a[i], b[j]) + distance(a[j], b[i]);
}

}  // namespace

double mdf(std::span<const Point3> a, std::span<const Point3> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorKind::arity, "mdf operands must have the same nonzero point count");
  }
  const std::size_t m = a.size();
  PairSums sums;
  for (std::size_t i = 0; i < m / 2; ++i) accumulate_pair(a, b, i, m - 1 - i, sums);
  if (m % 2 == 1) {
    const double mid = distance(a[m / 2], b[m / 2]);
    sums.direct += mid;
    sums.flipped += mid;
  }
  return std::min(sums.direct, sums.flipped) / static_cast<double>(m);
}

double mdf(const ResampledStreamline& a, const ResampledStreamline& b) {
  return mdf(std::span<const Point3>(a.points), std::span<const Point3>(b.points));
}

double mdf_bounded(std::span<const Point3> a, std::span<const Point3> b, double bound) {
  const std::size_t m = a.size();
  const double md = static_cast<double>(m);
  PairSums sums;
  // Partial sums only grow, so once both exceed the bound the full value does too.
  for (std::size_t i = 0; i < m / 2; ++i) {
    accumulate_pair(a, b, i, m - 1 - i, sums);
    if (std::min(sums.direct, sums.flipped) / md >= bound) {
      return std::min(sums.direct, sums.flipped) / md;
    }
  }
  if (m % 2 == 1) {
    const double mid = distance(a[m / 2], b[m / 2]);
    sums.direct += mid;
    sums.flipped += mid;
  }
  return std::min(sums.direct, sums.flipped) / md;
}

}  // namespace fss
