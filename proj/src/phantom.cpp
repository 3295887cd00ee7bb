#include "fss/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fss/error.hpp"

namespace fss {

namespace {

constexpr double kDeg = M_PI / 180.0;

int voxels_for(double extent_mm, double voxel_mm) {
  return std::max(1, static_cast<int>(std::lround(extent_mm / voxel_mm)));
}

GridFrame frame_for(std::array<double, 3> extent_mm, double voxel_mm) {
  GridFrame f;
  f.dims = {voxels_for(extent_mm[0], voxel_mm), voxels_for(extent_mm[1], voxel_mm),
            voxels_for(extent_mm[2], voxel_mm)};
  f.voxel_size = {voxel_mm, voxel_mm, voxel_mm};
  f.origin = {0.5 * voxel_mm, 0.5 * voxel_mm, 0.5 * voxel_mm};
  return f;
}

void validate_spec(const PhantomSpec& s) {
  if (!(s.pennation_deg >= 0.0 && s.pennation_deg < 90.0)) {
    throw Error(ErrorKind::invalid_spec, "pennation angle must lie in [0, 90) degrees");
  }
  if (!(s.voxel_mm > 0.0)) throw Error(ErrorKind::invalid_spec, "voxel size must be positive");
  for (double d : s.dims_mm) {
    if (!(d > 0.0)) throw Error(ErrorKind::invalid_spec, "phantom dimensions must be positive");
  }
  if (!(s.fa > 0.0 && s.fa <= 1.0)) throw Error(ErrorKind::invalid_spec, "fa must lie in (0, 1]");
  if (s.inclusions < 0) throw Error(ErrorKind::invalid_spec, "inclusion count must be non-negative");
  if (s.inclusions > 0 && !(s.inclusion_radius_min_mm > 0.0 && s.inclusion_radius_max_mm >= s.inclusion_radius_min_mm)) {
    throw Error(ErrorKind::invalid_spec, "inclusion radii must satisfy 0 < min <= max");
  }
  if (s.shape == PhantomShape::curved_arc) {
    if (!(s.thickness_mm > 0.0 && s.radius_mm > 0.5 * s.thickness_mm)) {
      throw Error(ErrorKind::invalid_spec, "arc radius must exceed half the thickness");
    }
    if (!(s.sweep_deg > 0.0 && s.sweep_deg < 180.0)) {
      throw Error(ErrorKind::invalid_spec, "arc sweep must lie in (0, 180) degrees");
    }
  }
  if (s.angular_jitter_deg < 0.0) throw Error(ErrorKind::invalid_spec, "jitter must be non-negative");
}

Phantom make_box(const PhantomSpec& s) {
  const auto frame = frame_for(s.dims_mm, s.voxel_mm);
  Phantom ph{VoxelMask(frame), OrientationField(frame), {}};
  const double th = s.pennation_deg * kDeg;
  const Point3 dir{std::sin(th), 0.0, std::cos(th)};
  for (std::size_t idx = 0; idx < frame.voxel_count(); ++idx) {
    ph.mask.set(frame.unlinear(idx), true);
    ph.field.set(idx, {dir, s.fa});
  }
  const double width = frame.dims[0] * s.voxel_mm;
  const double length = frame.dims[2] * s.voxel_mm;
  const double full = th > 0.0 ? std::min(width / std::sin(th), length / std::cos(th)) : length;
  ph.truth.fiber_length_mm = full;
  ph.truth.pennation_deg = s.pennation_deg;
  ph.truth.line_of_action = {0.0, 0.0, 1.0};
  ph.truth.muscle_length_mm = length;
  ph.truth.volume_mm3 = width * frame.dims[1] * s.voxel_mm * length;
  return ph;
}

// Meridian family x = x0 sqrt(1 - z^2/c^2): tangent (-x z, -y z, c^2 - z^2) up to scale.
Phantom make_fusiform(const PhantomSpec& s) {
  const auto frame = frame_for(s.dims_mm, s.voxel_mm);
  Phantom ph{VoxelMask(frame), OrientationField(frame), {}};
  const double a = 0.5 * frame.dims[0] * s.voxel_mm;
  const double b = 0.5 * frame.dims[1] * s.voxel_mm;
  const double c = 0.5 * frame.dims[2] * s.voxel_mm;
  for (std::size_t idx = 0; idx < frame.voxel_count(); ++idx) {
    const auto v = frame.unlinear(idx);
    const Point3 p = frame.center(v) - Point3{a, b, c};
    const double q = (p.x * p.x) / (a * a) + (p.y * p.y) / (b * b) + (p.z * p.z) / (c * c);
    if (q > 1.0) continue;
    ph.mask.set(v, true);
    const double w = std::max(c * c - p.z * p.z, 1e-6 * c * c);
    ph.field.set(idx, {normalized(Point3{-p.x * p.z, -p.y * p.z, w}), s.fa});
  }
  ph.truth.fiber_length_mm = 2.0 * c;
  ph.truth.pennation_deg = 0.0;
  ph.truth.line_of_action = {0.0, 0.0, 1.0};
  ph.truth.muscle_length_mm = 2.0 * c;
  ph.truth.volume_mm3 = 4.0 / 3.0 * M_PI * a * b * c;
  return ph;
}

// Arcs centered on (cx, *, cz), angle phi in [-sweep/2, sweep/2] from +x toward +z.
Phantom make_arc(const PhantomSpec& s) {
  const double half = 0.5 * s.sweep_deg * kDeg;
  const double r_in = s.radius_mm - 0.5 * s.thickness_mm;
  const double r_out = s.radius_mm + 0.5 * s.thickness_mm;
  const double pad = s.voxel_mm;
  const double x_min = r_in * std::cos(half);
  const double z_half = r_out * std::sin(half);
  const std::array<double, 3> extent{r_out - x_min + 2.0 * pad, s.dims_mm[1], 2.0 * z_half + 2.0 * pad};
  const auto frame = frame_for(extent, s.voxel_mm);
  const double cx = pad - x_min;
  const double cz = pad + z_half;

  Phantom ph{VoxelMask(frame), OrientationField(frame), {}};
  for (std::size_t idx = 0; idx < frame.voxel_count(); ++idx) {
    const auto v = frame.unlinear(idx);
    const Point3 p = frame.center(v);
    const double dx = p.x - cx;
    const double dz = p.z - cz;
    const double r = std::hypot(dx, dz);
    const double phi = std::atan2(dz, dx);
    if (r < r_in || r > r_out || std::abs(phi) > half) continue;
    ph.mask.set(v, true);
    ph.field.set(idx, {Point3{-dz / r, 0.0, dx / r}, s.fa});
  }
  ph.truth.fiber_length_mm = s.sweep_deg * kDeg * s.radius_mm;
  ph.truth.pennation_deg = 0.0;
  ph.truth.line_of_action = {0.0, 0.0, 1.0};
  ph.truth.muscle_length_mm = 2.0 * z_half;
  ph.truth.volume_mm3 = 0.5 * (r_out * r_out - r_in * r_in) * (s.sweep_deg * kDeg) * s.dims_mm[1];
  return ph;
}

void add_inclusions(Phantom& ph, const PhantomSpec& s, std::mt19937_64& rng) {
  const auto& f = ph.mask.frame();
  std::vector<std::size_t> inside;
  for (std::size_t idx = 0; idx < f.voxel_count(); ++idx) {
    if (ph.mask.occupied(idx)) inside.push_back(idx);
  }
  if (inside.empty()) return;
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  std::uniform_real_distribution<double> radius(s.inclusion_radius_min_mm, s.inclusion_radius_max_mm);
  for (int n = 0; n < s.inclusions; ++n) {
    const Point3 c = f.center(f.unlinear(inside[pick(rng)]));
    const double r = radius(rng);
    for (auto idx : inside) {
      if (distance(f.center(f.unlinear(idx)), c) > r) continue;
      if (s.inclusion_holes) {
        ph.mask.set(f.unlinear(idx), false);
        ph.field.set(idx, OrientationSample{});
      } else {
        auto sample = ph.field.at(idx);
        sample.fa = s.inclusion_fa;
        ph.field.set(idx, sample);
      }
    }
  }
}

void add_jitter(Phantom& ph, const PhantomSpec& s, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, s.angular_jitter_deg * kDeg);
  std::uniform_real_distribution<double> turn(0.0, 2.0 * M_PI);
  const auto& f = ph.mask.frame();
  for (std::size_t idx = 0; idx < f.voxel_count(); ++idx) {
    if (!ph.mask.occupied(idx)) continue;
    auto sample = ph.field.at(idx);
    const Point3 d = sample.direction;
    const Point3 helper = std::abs(d.x) < 0.9 ? Point3{1, 0, 0} : Point3{0, 1, 0};
    const Point3 u = normalized(cross(d, helper));
    const Point3 w = cross(d, u);
    const double tilt = gauss(rng);
    const double psi = turn(rng);
    sample.direction = normalized(d * std::cos(tilt) + (u * std::cos(psi) + w * std::sin(psi)) * std::sin(tilt));
    ph.field.set(idx, sample);
  }
}

}  // namespace

std::string to_string(PhantomShape shape) {
  switch (shape) {
    case PhantomShape::box_unipennate:
      return "box";
    case PhantomShape::fusiform:
      return "fusiform";
    case PhantomShape::curved_arc:
      return "arc";
  }
  return "box";
}

PhantomShape parse_shape(const std::string& name) {
  if (name == "box" || name == "box_unipennate") return PhantomShape::box_unipennate;
  if (name == "fusiform") return PhantomShape::fusiform;
  if (name == "arc" || name == "curved_arc") return PhantomShape::curved_arc;
  throw Error(ErrorKind::invalid_spec, "unknown phantom shape '" + name + "'");
}

Phantom make_phantom(const PhantomSpec& spec) {
  validate_spec(spec);
  Phantom ph;
  switch (spec.shape) {
    case PhantomShape::box_unipennate:
      ph = make_box(spec);
      break;
    case PhantomShape::fusiform:
      ph = make_fusiform(spec);
      break;
    case PhantomShape::curved_arc:
      ph = make_arc(spec);
      break;
  }
  if (ph.mask.occupied_count() == 0) throw Error(ErrorKind::invalid_spec, "phantom mask is empty");
  std::mt19937_64 rng(spec.seed);
  if (spec.inclusions > 0) add_inclusions(ph, spec, rng);
  if (ph.mask.occupied_count() == 0) throw Error(ErrorKind::invalid_spec, "inclusions remove the whole mask");
  if (spec.angular_jitter_deg > 0.0) add_jitter(ph, spec, rng);
  ph.truth.seed = spec.seed;
  return ph;
}

PhantomSpec scaled(PhantomSpec spec, double factor) {
  for (auto& d : spec.dims_mm) d *= factor;
  spec.radius_mm *= factor;
  spec.thickness_mm *= factor;
  spec.inclusion_radius_min_mm *= factor;
  spec.inclusion_radius_max_mm *= factor;
  return spec;
}

}  // namespace fss
