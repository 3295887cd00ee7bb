#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fss/architecture.hpp"
#include "fss/config.hpp"
#include "fss/io.hpp"
#include "fss/metrics.hpp"
#include "fss/phantom.hpp"
#include "fss/sampling.hpp"
#include "fss/stats.hpp"
#include "fss/tracking.hpp"

namespace fss {

enum class Method { fss, slices_2d, volume_3d };

/// "fss", "2ds", "3ds".
std::string to_string(Method m);
Method parse_method(std::string_view s);

StreamlineSet subset(const StreamlineSet& set, const std::vector<std::size_t>& indices);

/// k streamlines drawn uniformly without replacement, in their original order.
StreamlineSet random_subset(const StreamlineSet& set, std::size_t k, std::uint64_t seed);

/// Fitted and extrapolated tracks from every seed (ids are seed indices).
StreamlineSet track_and_postprocess(const OrientationField& field, const VoxelMask& mask, const SeedSet& seeds,
                                    const TrackingConfig& cfg);

struct TrackGeneration {
  StreamlineSet set;          ///< exactly the requested count
  std::size_t seeds = 0;      ///< seeds in the final round
  std::size_t produced = 0;   ///< tracks surviving post-processing before subsampling
  double spacing_mm = 0.0;    ///< 3D lattice spacing of the final round
  int divisions = 0;          ///< 2D in-plane seeds per voxel edge in the final round
  int rounds = 0;
};

/// Seeds with `strategy`, tracks, fits and extrapolates, then keeps a random
/// subset of exactly `target` (seeded by cfg.sample_seed). Lattices are
/// refined in steps of voxel / d, d = 1, 2, ..., so every voxel receives the
/// same number of seeds, until enough tracks survive. A positive
/// cfg.seed_spacing_mm is the first 3D spacing tried. Throws
/// insufficient_extent when the target is out of reach.
TrackGeneration generate_tracks(const OrientationField& field, const VoxelMask& mask, SeedStrategy strategy,
                                std::size_t target, const RunConfig& cfg);

struct Evaluation {
  DensityResult density;
  MuscleArchitecture arch;
};

Evaluation evaluate(const StreamlineSet& tracts, const VoxelMask& mask, const RunConfig& cfg);

struct MethodRun {
  Method method = Method::fss;
  StreamlineSet tracts;
  Evaluation eval;
  std::optional<FssTrace> trace;  ///< fss only
};

struct PipelineResult {
  StreamlineSet candidates;  ///< cfg.fss.n_candidates tracks from 3D seeding
  std::vector<MethodRun> runs;
};

/// Candidate generation, fss filtering, 2DS and 3DS baselines at k tracks,
/// and metrics plus architecture for each.
PipelineResult run_pipeline(const OrientationField& field, const VoxelMask& mask, const RunConfig& cfg,
                            const std::vector<Method>& methods = {Method::fss, Method::volume_3d, Method::slices_2d});

/// One measured run as listed in a comparison manifest.
struct RunRecord {
  std::string case_id;
  std::string method;
  std::string group;  ///< functional group; empty when not supplied
  GridFrame frame;
  TractMetrics metrics;
  MuscleArchitecture arch;
  std::size_t streamlines = 0;
};

/// Names and accessors of the compared quantities, in report column order.
const std::vector<std::string>& comparison_metrics();
double metric_value(const RunRecord& r, const std::string& metric);

struct MetricComparison {
  std::string metric;
  std::string method_a;
  std::string method_b;
  std::vector<std::string> cases;   ///< cases with finite values for both methods
  std::vector<double> a;
  std::vector<double> b;
  std::size_t skipped = 0;          ///< cases with a missing or non-finite value
  std::optional<PercentDiff> percent;
  std::optional<TTest> t;            ///< needs at least two cases
  std::optional<BlandAltman> agreement;
};

struct FractionRow {
  std::string method;
  std::string scope;  ///< "volume" (per group) or "pcsa" (per muscle within group)
  std::string group;
  std::string case_id;
  double fraction = 0.0;
};

struct CompareReport {
  std::vector<RunRecord> runs;
  std::vector<MetricComparison> comparisons;
  std::vector<FractionRow> fractions;
};

/// Pairwise method comparisons over cases. Method pairs follow first
/// appearance order, `method_a` being the earlier one. Throws frame_mismatch
/// when runs of one case sit on different grids.
CompareReport compare_runs(std::vector<RunRecord> runs);

/// Manifest CSV columns: case, method, mask, strl[, group]. Relative paths
/// resolve against the manifest directory.
CompareReport compare_manifest(const std::filesystem::path& manifest, const RunConfig& cfg);

CsvTable metrics_table();
void add_metrics_row(CsvTable& t, const std::string& label, const TractMetrics& m, SdcvSupport support,
                     std::size_t streamlines);

CsvTable arch_table();
void add_arch_row(CsvTable& t, const std::string& label, const MuscleArchitecture& a);

CsvTable runs_table(const CompareReport& r);
CsvTable comparisons_table(const CompareReport& r);
CsvTable bland_altman_table(const MetricComparison& c);
CsvTable fractions_table(const CompareReport& r);

/// Sidecar text report of a phantom's ground truth.
std::string ground_truth_report(const PhantomSpec& spec, const GroundTruth& truth);

}  // namespace fss
