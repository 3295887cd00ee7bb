#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fss/architecture.hpp"
#include "fss/metrics.hpp"
#include "fss/sampling.hpp"
#include "fss/tracking.hpp"

namespace fss {

/// Every tunable of a pipeline run. Text form is one `key = value` per line;
/// '#' starts a comment.
struct RunConfig {
  FssConfig fss;
  TrackingConfig tracking;
  double r2_threshold = kDefaultR2Threshold;
  SdcvSupport sdcv_support = SdcvSupport::all;
  MlSource ml_source = MlSource::tracts;
  /// 3D lattice spacing for explicit seeding; 0 selects the spacing
  /// automatically so tracking yields the requested track count.
  double seed_spacing_mm = 0.0;
  int n_slices = 5;
  /// Track baselines from n_candidates seeds and subsample to k, instead of
  /// tracking exactly k.
  bool equalize_candidates = false;
  /// Seed of the random thinning that brings a track pool to an exact count.
  std::uint64_t sample_seed = 0;
  std::string output_dir = ".";
};

/// Throws config for unknown or repeated keys and out-of-range values.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Inverse of parse_run_config.
std::string to_text(const RunConfig& cfg);

/// Throws config when any field is out of range.
void validate(const RunConfig& cfg);

std::string to_string(InitRule r);
std::string to_string(SdcvSupport s);
std::string to_string(MlSource s);
InitRule parse_init_rule(std::string_view s);
SdcvSupport parse_sdcv_support(std::string_view s);
MlSource parse_ml_source(std::string_view s);

}  // namespace fss
