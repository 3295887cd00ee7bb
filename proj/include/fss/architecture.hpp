#pragma once

#include <map>
#include <string>
#include <vector>

#include "fss/stats.hpp"
#include "fss/streamline.hpp"
#include "fss/volume.hpp"

namespace fss {

enum class LoaSource { endpoint_fit, mean_direction };
enum class ArchType { pennate, non_pennate };
enum class MlSource { tracts, mask };

std::string to_string(LoaSource s);
std::string to_string(ArchType t);

struct LineOfAction {
  Point3 anchor;
  Point3 direction{0.0, 0.0, 1.0};
  double r2 = 0.0;
  LoaSource source = LoaSource::endpoint_fit;
};

struct MuscleArchitecture {
  double mv = 0.0;           ///< mm^3
  double fl_median = 0.0;    ///< mm
  double ml = 0.0;           ///< mm
  double fl_ml_ratio = 0.0;
  double pa_median = 0.0;    ///< degrees
  double pcsa = 0.0;         ///< mm^2
  LineOfAction loa;
  ArchType arch_type = ArchType::non_pennate;
};

inline constexpr double kDefaultR2Threshold = 0.9;

/// Occupied voxel count times voxel volume.
double muscle_volume(const VoxelMask& mask);

struct EndpointFit {
  Point3 centroid;
  Point3 direction;
  double r2 = 0.0;
};

/// Total-least-squares line through a point cloud. r2 is
/// 1 - mean squared perpendicular residual / mean squared centroid distance,
/// i.e. the largest covariance eigenvalue over the trace.
EndpointFit fit_line(const std::vector<Point3>& points);

/// Endpoint-fit line when its r2 exceeds the threshold, otherwise the mean
/// unit chord direction (sign-aligned to the first tract) through the
/// endpoint centroid. Needs at least 3 streamlines.
LineOfAction line_of_action(const StreamlineSet& set, double r2_threshold = kDefaultR2Threshold);

/// Angle in [0, 90] between the tract chord and the line of action.
double pennation_angle(const Streamline& s, const LineOfAction& loa);

/// Extent of all tract points projected on the line-of-action direction.
double muscle_length(const StreamlineSet& set, const LineOfAction& loa);

/// Extent of occupied voxel centers projected on the line-of-action direction.
double muscle_length(const VoxelMask& mask, const LineOfAction& loa);

MuscleArchitecture summarize(const VoxelMask& mask, const StreamlineSet& set, const LineOfAction& loa,
                             MlSource ml_source = MlSource::tracts);

/// Computes the line of action itself and then summarizes.
MuscleArchitecture summarize(const VoxelMask& mask, const StreamlineSet& set,
                             double r2_threshold = kDefaultR2Threshold, MlSource ml_source = MlSource::tracts);

struct GroupedMuscle {
  std::string group;
  std::string muscle;
  MuscleArchitecture arch;
};

struct GroupFractions {
  std::map<std::string, double> volume_fraction;   ///< group -> share of total MV
  std::vector<double> pcsa_fraction;               ///< per record, share of its group's PCSA
};

GroupFractions group_fractions(const std::vector<GroupedMuscle>& records);

}  // namespace fss
