#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "fss/volume.hpp"

namespace fss {

enum class PhantomShape { box_unipennate, fusiform, curved_arc };

std::string to_string(PhantomShape shape);
PhantomShape parse_shape(const std::string& name);

/// Synthetic muscle with analytically known fiber geometry.
///
/// box_unipennate: cuboid of `dims_mm`, fibers at `pennation_deg` to z in the x-z plane.
/// fusiform: ellipsoid inscribed in `dims_mm`, fibers along meridians converging at the z poles.
/// curved_arc: annular sector in the x-z plane (mid radius `radius_mm`, radial width
///   `thickness_mm`, `sweep_deg`), depth dims_mm[1] along y, fibers on concentric arcs.
struct PhantomSpec {
  PhantomShape shape = PhantomShape::box_unipennate;
  double pennation_deg = 10.0;
  std::array<double, 3> dims_mm{3.0, 10.0, 200.0};
  double voxel_mm = 1.0;
  double fa = 0.5;

  double radius_mm = 30.0;
  double thickness_mm = 10.0;
  double sweep_deg = 90.0;

  /// Low-anisotropy spherical inclusions; tracking stops inside them, which
  /// breaks fibers into fragments of heterogeneous length.
  int inclusions = 0;
  double inclusion_radius_min_mm = 1.5;
  double inclusion_radius_max_mm = 3.0;
  double inclusion_fa = 0.05;
  /// Carve inclusions out of the mask instead; fibers then end on their
  /// surface like on an internal aponeurosis.
  bool inclusion_holes = false;

  /// Gaussian angular perturbation of every field vector; 0 disables it.
  double angular_jitter_deg = 0.0;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  double fiber_length_mm = 0.0;   ///< analytic length of a full (unobstructed) fiber
  double pennation_deg = 0.0;     ///< fiber angle to the line of action
  Point3 line_of_action{0.0, 0.0, 1.0};
  double muscle_length_mm = 0.0;  ///< fiber extent along the line of action
  double volume_mm3 = 0.0;        ///< continuous (not voxelized) volume, before inclusions
  std::uint64_t seed = 0;
};

struct Phantom {
  VoxelMask mask;
  OrientationField field;
  GroundTruth truth;
};

/// Throws invalid_spec for pennation outside [0, 90) or non-positive sizes.
Phantom make_phantom(const PhantomSpec& spec);

/// Uniform isotropic scaling of every PhantomSpec length (voxel size kept).
PhantomSpec scaled(PhantomSpec spec, double factor);

}  // namespace fss
