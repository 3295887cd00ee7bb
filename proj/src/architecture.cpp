#include "fss/architecture.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fss/error.hpp"

namespace fss {

std::string to_string(LoaSource s) { return s == LoaSource::endpoint_fit ? "endpoint_fit" : "mean_direction"; }

std::string to_string(ArchType t) { return t == ArchType::pennate ? "pennate" : "non_pennate"; }

double muscle_volume(const VoxelMask& mask) {
  const auto n = mask.occupied_count();
  if (n == 0) throw Error(ErrorKind::empty_domain, "mask has no occupied voxels");
  return static_cast<double>(n) * mask.frame().voxel_volume();
}

EndpointFit fit_line(const std::vector<Point3>& points) {
  if (points.size() < 2) throw Error(ErrorKind::degenerate_geometry, "line fit needs at least two points");
  Point3 c{};
  for (const auto& p : points) c += p;
  c = c / static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d(p.x - c.x, p.y - c.y, p.z - c.z);
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  const double total = cov.trace();
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate_geometry, "all endpoints coincide");

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d v = eig.eigenvectors().col(2);
  Point3 dir = normalized(Point3{v(0), v(1), v(2)});
  // Sign convention: largest-magnitude component positive.
  const double comps[3] = {dir.x, dir.y, dir.z};
  int big = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(comps[a]) > std::abs(comps[big])) big = a;
  }
  if (comps[big] < 0.0) dir = -dir;

  return {c, dir, std::clamp(eig.eigenvalues()(2) / total, 0.0, 1.0)};
}

LineOfAction line_of_action(const StreamlineSet& set, double r2_threshold) {
  if (set.size() < 3) throw Error(ErrorKind::arity, "line of action needs at least 3 streamlines");
  std::vector<Point3> endpoints;
  endpoints.reserve(2 * set.size());
  for (const auto& s : set.streamlines) {
    if (s.points.empty()) throw Error(ErrorKind::invalid_streamline, "empty streamline");
    endpoints.push_back(s.points.front());
    endpoints.push_back(s.points.back());
  }
  const auto fit = fit_line(endpoints);

  LineOfAction loa;
  loa.anchor = fit.centroid;
  loa.r2 = fit.r2;
  if (fit.r2 > r2_threshold) {
    loa.direction = fit.direction;
    loa.source = LoaSource::endpoint_fit;
    return loa;
  }

  Point3 reference{};
  Point3 sum{};
  bool have_reference = false;
  for (const auto& s : set.streamlines) {
    const Point3 chord = s.points.back() - s.points.front();
    const double len = norm(chord);
    if (!(len > 0.0)) continue;
    Point3 u = chord / len;
    if (!have_reference) {
      reference = u;
      have_reference = true;
    } else if (dot(u, reference) < 0.0) {
      u = -u;
    }
    sum += u;
  }
  if (!have_reference || !(norm(sum) > 0.0)) {
    throw Error(ErrorKind::degenerate_geometry, "tract chords have no mean direction");
  }
  loa.direction = normalized(sum);
  loa.source = LoaSource::mean_direction;
  return loa;
}

double pennation_angle(const Streamline& s, const LineOfAction& loa) {
  if (s.points.size() < 2) throw Error(ErrorKind::degenerate_geometry, "tract has no chord");
  const Point3 chord = s.points.back() - s.points.front();
  if (!(norm(chord) > 0.0)) throw Error(ErrorKind::degenerate_geometry, "tract chord has zero length");
  const double a = angle_deg(chord, loa.direction);
  return a > 90.0 ? 180.0 - a : a;
}

namespace {

template <typename Range>
double projected_extent(const Range& points, Point3 dir) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    const double t = dot(p, dir);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return hi - lo;
}

}  // namespace

double muscle_length(const StreamlineSet& set, const LineOfAction& loa) {
  std::vector<Point3> all;
  for (const auto& s : set.streamlines) all.insert(all.end(), s.points.begin(), s.points.end());
  if (all.empty()) throw Error(ErrorKind::arity, "muscle length needs at least one tract point");
  return projected_extent(all, loa.direction);
}

double muscle_length(const VoxelMask& mask, const LineOfAction& loa) {
  const auto& f = mask.frame();
  std::vector<Point3> centers;
  for (std::size_t idx = 0; idx < f.voxel_count(); ++idx) {
    if (mask.occupied(idx)) centers.push_back(f.center(f.unlinear(idx)));
  }
  if (centers.empty()) throw Error(ErrorKind::empty_domain, "mask has no occupied voxels");
  return projected_extent(centers, loa.direction);
}

MuscleArchitecture summarize(const VoxelMask& mask, const StreamlineSet& set, const LineOfAction& loa,
                             MlSource ml_source) {
  if (set.empty()) throw Error(ErrorKind::arity, "no tracts to summarize");
  std::vector<double> lengths;
  std::vector<double> angles;
  lengths.reserve(set.size());
  angles.reserve(set.size());
  for (const auto& s : set.streamlines) {
    lengths.push_back(arc_length(s));
    angles.push_back(pennation_angle(s, loa));
  }

  MuscleArchitecture a;
  a.mv = muscle_volume(mask);
  a.fl_median = median(lengths);
  a.pa_median = median(angles);
  a.ml = ml_source == MlSource::tracts ? muscle_length(set, loa) : muscle_length(mask, loa);
  if (!(a.fl_median > 0.0 && a.ml > 0.0)) throw Error(ErrorKind::degenerate_geometry, "zero fiber or muscle length");
  a.fl_ml_ratio = a.fl_median / a.ml;
  a.pcsa = a.mv * std::cos(a.pa_median * M_PI / 180.0) / a.fl_median;
  a.loa = loa;
  a.arch_type = loa.source == LoaSource::endpoint_fit ? ArchType::pennate : ArchType::non_pennate;
  return a;
}

MuscleArchitecture summarize(const VoxelMask& mask, const StreamlineSet& set, double r2_threshold,
                             MlSource ml_source) {
  return summarize(mask, set, line_of_action(set, r2_threshold), ml_source);
}

GroupFractions group_fractions(const std::vector<GroupedMuscle>& records) {
  if (records.empty()) throw Error(ErrorKind::arity, "no muscles to group");
  double total = 0.0;
  std::map<std::string, double> group_mv;
  std::map<std::string, double> group_pcsa;
  for (const auto& r : records) {
    total += r.arch.mv;
    group_mv[r.group] += r.arch.mv;
    group_pcsa[r.group] += r.arch.pcsa;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::empty_domain, "total muscle volume is zero");

  GroupFractions out;
  for (const auto& [group, mv] : group_mv) out.volume_fraction[group] = mv / total;
  out.pcsa_fraction.reserve(records.size());
  for (const auto& r : records) {
    const double g = group_pcsa[r.group];
    if (!(g > 0.0)) throw Error(ErrorKind::empty_domain, "group '" + r.group + "' has zero total PCSA");
    out.pcsa_fraction.push_back(r.arch.pcsa / g);
  }
  return out;
}

}  // namespace fss
