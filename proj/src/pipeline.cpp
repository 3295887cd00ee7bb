#include "fss/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "fss/error.hpp"

namespace fss {

namespace {

constexpr int kMaxRounds = 12;
constexpr double kHeadroom = 1.05;

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::fss:
      return "fss";
    case Method::slices_2d:
      return "2ds";
    case Method::volume_3d:
      return "3ds";
  }
  return "fss";
}

Method parse_method(std::string_view s) {
  if (s == "fss") return Method::fss;
  if (s == "2ds") return Method::slices_2d;
  if (s == "3ds") return Method::volume_3d;
  throw Error(ErrorKind::config, "method must be fss, 2ds or 3ds");
}

StreamlineSet subset(const StreamlineSet& set, const std::vector<std::size_t>& indices) {
  StreamlineSet out;
  out.streamlines.reserve(indices.size());
  for (auto i : indices) out.streamlines.push_back(set.streamlines.at(i));
  return out;
}

StreamlineSet random_subset(const StreamlineSet& set, std::size_t k, std::uint64_t seed) {
  if (k > set.size()) throw Error(ErrorKind::arity, "random subset larger than the set");
  std::vector<std::size_t> all(set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates, then restore the original order.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return subset(set, all);
}

StreamlineSet track_and_postprocess(const OrientationField& field, const VoxelMask& mask, const SeedSet& seeds,
                                    const TrackingConfig& cfg) {
  return postprocess(track(field, mask, seeds, cfg).set, mask, cfg);
}

TrackGeneration generate_tracks(const OrientationField& field, const VoxelMask& mask, SeedStrategy strategy,
                                std::size_t target, const RunConfig& cfg) {
  if (target == 0) throw Error(ErrorKind::arity, "track target must be positive");
  const auto& f = mask.frame();
  const double voxel = std::min({f.voxel_size.x, f.voxel_size.y, f.voxel_size.z});
  const bool explicit_spacing = strategy == SeedStrategy::volume_3d && cfg.seed_spacing_mm > 0.0;

  // Seeds per unit of d: d^3 per voxel in 3D, d^2 per voxel in each 2D slice.
  const double per_unit = strategy == SeedStrategy::volume_3d
                              ? static_cast<double>(mask.occupied_count())
                              : static_cast<double>(seeds_2d(mask, cfg.n_slices, 1).seeds.size());
  const double power = strategy == SeedStrategy::volume_3d ? 3.0 : 2.0;
  auto divisions_for = [&](double yield) {
    return std::max(1, static_cast<int>(std::ceil(
                           std::pow(kHeadroom * static_cast<double>(target) / (per_unit * yield), 1.0 / power) - 1e-9)));
  };

  TrackGeneration gen;
  int d = divisions_for(1.0);
  StreamlineSet tracks;
  for (int round = 1;; ++round) {
    SeedSet seeds;
    if (strategy == SeedStrategy::volume_3d) {
      gen.spacing_mm = explicit_spacing && round == 1 ? cfg.seed_spacing_mm : voxel / d;
      seeds = seeds_3d(mask, gen.spacing_mm);
    } else {
      gen.divisions = d;
      seeds = seeds_2d(mask, cfg.n_slices, d);
    }
    tracks = track_and_postprocess(field, mask, seeds, cfg.tracking);
    gen.rounds = round;
    gen.seeds = seeds.seeds.size();
    gen.produced = tracks.size();
    if (tracks.size() >= target) break;
    if (round == kMaxRounds) {
      throw Error(ErrorKind::insufficient_extent,
                  "only " + std::to_string(tracks.size()) + " of " + std::to_string(target) +
                      " tracks survive after densifying the seeds " + std::to_string(kMaxRounds) + " times");
    }
    const double yield = static_cast<double>(tracks.size()) / static_cast<double>(std::max<std::size_t>(gen.seeds, 1));
    const int current = explicit_spacing && round == 1 ? static_cast<int>(std::floor(voxel / gen.spacing_mm)) : d;
    d = std::max(current + 1, yield > 0.0 ? divisions_for(yield) : 2 * current);
  }
  gen.set = tracks.size() == target ? std::move(tracks) : random_subset(tracks, target, cfg.sample_seed);
  return gen;
}

Evaluation evaluate(const StreamlineSet& tracts, const VoxelMask& mask, const RunConfig& cfg) {
  Evaluation e;
  e.density = density(tracts, mask, cfg.sdcv_support);
  e.arch = summarize(mask, tracts, cfg.r2_threshold, cfg.ml_source);
  return e;
}

PipelineResult run_pipeline(const OrientationField& field, const VoxelMask& mask, const RunConfig& cfg,
                            const std::vector<Method>& methods) {
  validate(cfg);
  const auto k = static_cast<std::size_t>(cfg.fss.k);
  const auto n = static_cast<std::size_t>(cfg.fss.n_candidates);
  PipelineResult out;
  const bool need_candidates =
      cfg.equalize_candidates || std::find(methods.begin(), methods.end(), Method::fss) != methods.end();
  if (need_candidates) out.candidates = generate_tracks(field, mask, SeedStrategy::volume_3d, n, cfg).set;

  for (Method m : methods) {
    MethodRun run;
    run.method = m;
    if (m == Method::fss) {
      auto r = fss_filter(out.candidates, cfg.fss);
      run.tracts = std::move(r.selected);
      run.trace = std::move(r.trace);
    } else {
      const auto strategy = m == Method::volume_3d ? SeedStrategy::volume_3d : SeedStrategy::slices_2d;
      if (cfg.equalize_candidates) {
        const auto& pool = m == Method::volume_3d ? out.candidates
                                                  : generate_tracks(field, mask, strategy, n, cfg).set;
        run.tracts = random_subset(pool, k, cfg.sample_seed);
      } else {
        run.tracts = generate_tracks(field, mask, strategy, k, cfg).set;
      }
    }
    run.eval = evaluate(run.tracts, mask, cfg);
    out.runs.push_back(std::move(run));
  }
  return out;
}

const std::vector<std::string>& comparison_metrics() {
  static const std::vector<std::string> names = {"sc",       "sd_mean",     "sdcv",      "fl_median", "ml",
                                                 "fl_ml_ratio", "pa_median", "pcsa",     "r2"};
  return names;
}

double metric_value(const RunRecord& r, const std::string& metric) {
  if (metric == "sc") return r.metrics.sc;
  if (metric == "sd_mean") return r.metrics.sd_mean;
  if (metric == "sdcv") return r.metrics.sdcv;
  if (metric == "fl_median") return r.arch.fl_median;
  if (metric == "ml") return r.arch.ml;
  if (metric == "fl_ml_ratio") return r.arch.fl_ml_ratio;
  if (metric == "pa_median") return r.arch.pa_median;
  if (metric == "pcsa") return r.arch.pcsa;
  if (metric == "r2") return r.arch.loa.r2;
  throw Error(ErrorKind::config, "unknown metric '" + metric + "'");
}

CompareReport compare_runs(std::vector<RunRecord> runs) {
  CompareReport report;
  std::vector<std::string> methods;
  std::vector<std::string> cases;
  std::map<std::pair<std::string, std::string>, const RunRecord*> index;
  std::map<std::string, GridFrame> case_frame;

  for (const auto& r : runs) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(cases.begin(), cases.end(), r.case_id) == cases.end()) cases.push_back(r.case_id);
    const auto [it, fresh] = case_frame.emplace(r.case_id, r.frame);
    if (!fresh && !(it->second == r.frame)) {
      throw Error(ErrorKind::frame_mismatch, "runs of case '" + r.case_id + "' use different grids");
    }
  }
  report.runs = std::move(runs);
  for (const auto& r : report.runs) {
    if (!index.emplace(std::pair{r.case_id, r.method}, &r).second) {
      throw Error(ErrorKind::config, "duplicate run for case '" + r.case_id + "' and method '" + r.method + "'");
    }
  }
  if (methods.size() < 2) throw Error(ErrorKind::arity, "comparison needs runs of at least two methods");

  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      for (const auto& metric : comparison_metrics()) {
        MetricComparison c;
        c.metric = metric;
        c.method_a = methods[i];
        c.method_b = methods[j];
        for (const auto& cs : cases) {
          const auto ia = index.find({cs, methods[i]});
          const auto ib = index.find({cs, methods[j]});
          if (ia == index.end() || ib == index.end()) {
            ++c.skipped;
            continue;
          }
          const double va = metric_value(*ia->second, metric);
          const double vb = metric_value(*ib->second, metric);
          if (!std::isfinite(va) || !std::isfinite(vb)) {
            ++c.skipped;
            continue;
          }
          c.cases.push_back(cs);
          c.a.push_back(va);
          c.b.push_back(vb);
        }
        if (!c.a.empty() && std::any_of(c.b.begin(), c.b.end(), [](double v) { return v != 0.0; })) {
          c.percent = percent_diff(c.a, c.b);
        }
        if (c.a.size() >= 2) {
          c.t = t_paired(c.a, c.b);
          c.agreement = bland_altman(c.a, c.b);
        }
        report.comparisons.push_back(std::move(c));
      }
    }
  }

  for (const auto& method : methods) {
    std::vector<GroupedMuscle> records;
    for (const auto& r : report.runs) {
      if (r.method == method && !r.group.empty()) records.push_back({r.group, r.case_id, r.arch});
    }
    if (records.empty()) continue;
    const auto fr = group_fractions(records);
    for (const auto& [group, value] : fr.volume_fraction) report.fractions.push_back({method, "volume", group, "", value});
    for (std::size_t i = 0; i < records.size(); ++i) {
      report.fractions.push_back({method, "pcsa", records[i].group, records[i].muscle, fr.pcsa_fraction[i]});
    }
  }
  return report;
}

CompareReport compare_manifest(const std::filesystem::path& manifest, const RunConfig& cfg) {
  const auto rows = parse_csv(read_file(manifest));
  if (rows.empty()) throw Error(ErrorKind::format, "manifest is empty");
  std::size_t first = 0;
  if (!rows[0].empty() && rows[0][0] == "case") first = 1;
  const auto base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  std::vector<RunRecord> runs;
  std::map<std::string, VoxelMask> masks;
  for (std::size_t i = first; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 4 && row.size() != 5) {
      throw Error(ErrorKind::format, "manifest line " + std::to_string(i + 1) + ": expected case,method,mask,strl[,group]");
    }
    const auto mask_path = resolve(row[2]).string();
    auto it = masks.find(mask_path);
    if (it == masks.end()) it = masks.emplace(mask_path, load_mask(mask_path)).first;
    const auto& mask = it->second;
    const auto tracts = load_streamlines(resolve(row[3]));
    check_frame(tracts, mask);
    const auto e = evaluate(tracts, mask, cfg);
    runs.push_back({row[0], row[1], row.size() == 5 ? row[4] : "", mask.frame(), e.density.metrics, e.arch,
                    tracts.size()});
  }
  return compare_runs(std::move(runs));
}

CsvTable metrics_table() {
  return CsvTable({"label", "streamlines", "sc", "sd_mean", "sdcv", "sdcv_defined", "sdcv_support"});
}

void add_metrics_row(CsvTable& t, const std::string& label, const TractMetrics& m, SdcvSupport support,
                     std::size_t streamlines) {
  t.row({label, std::to_string(streamlines), format_number(m.sc), format_number(m.sd_mean), format_number(m.sdcv),
         m.sdcv_defined ? "true" : "false", to_string(support)});
}

CsvTable arch_table() {
  return CsvTable({"label", "mv_mm3", "fl_median_mm", "ml_mm", "fl_ml_ratio", "pa_median_deg", "pcsa_mm2", "r2",
                   "loa_source", "arch_type", "loa_x", "loa_y", "loa_z"});
}

void add_arch_row(CsvTable& t, const std::string& label, const MuscleArchitecture& a) {
  t.row({label, format_number(a.mv), format_number(a.fl_median), format_number(a.ml), format_number(a.fl_ml_ratio),
         format_number(a.pa_median), format_number(a.pcsa), format_number(a.loa.r2), to_string(a.loa.source),
         to_string(a.arch_type), format_number(a.loa.direction.x), format_number(a.loa.direction.y),
         format_number(a.loa.direction.z)});
}

CsvTable runs_table(const CompareReport& r) {
  std::vector<std::string> header{"case", "method", "group", "streamlines"};
  for (const auto& m : comparison_metrics()) header.push_back(m);
  header.push_back("arch_type");
  CsvTable t(std::move(header));
  for (const auto& run : r.runs) {
    std::vector<std::string> row{run.case_id, run.method, run.group, std::to_string(run.streamlines)};
    for (const auto& m : comparison_metrics()) row.push_back(format_number(metric_value(run, m)));
    row.push_back(to_string(run.arch.arch_type));
    t.row(std::move(row));
  }
  return t;
}

CsvTable comparisons_table(const CompareReport& r) {
  CsvTable t({"metric", "method_a", "method_b", "cases", "skipped", "mean_a", "mean_b", "percent_diff",
              "percent_excluded", "t", "df", "p", "t_degenerate", "mean_diff", "sd_diff", "loa_low", "loa_high",
              "ci_low", "ci_high"});
  const std::string na = "";
  for (const auto& c : r.comparisons) {
    std::vector<std::string> row{c.metric, c.method_a, c.method_b, std::to_string(c.cases.size()),
                                 std::to_string(c.skipped)};
    row.push_back(c.a.empty() ? na : format_number(mean(c.a)));
    row.push_back(c.b.empty() ? na : format_number(mean(c.b)));
    row.push_back(c.percent ? format_number(c.percent->value) : na);
    row.push_back(c.percent ? std::to_string(c.percent->excluded) : na);
    if (c.t) {
      row.push_back(format_number(c.t->t));
      row.push_back(std::to_string(c.t->df));
      row.push_back(c.t->p ? format_number(*c.t->p) : na);
      row.push_back(c.t->degenerate ? "true" : "false");
    } else {
      row.insert(row.end(), {na, na, na, na});
    }
    if (c.agreement) {
      const auto& ba = *c.agreement;
      for (double v : {ba.mean_diff, ba.sd_diff, ba.loa_low, ba.loa_high, ba.ci_low, ba.ci_high}) {
        row.push_back(format_number(v));
      }
    } else {
      row.insert(row.end(), {na, na, na, na, na, na});
    }
    t.row(std::move(row));
  }
  return t;
}

CsvTable bland_altman_table(const MetricComparison& c) {
  CsvTable t({"case", "mean", "diff"});
  if (!c.agreement) return t;
  for (std::size_t i = 0; i < c.cases.size(); ++i) {
    t.row({c.cases[i], format_number(c.agreement->cases[i].mean), format_number(c.agreement->cases[i].diff)});
  }
  return t;
}

CsvTable fractions_table(const CompareReport& r) {
  CsvTable t({"method", "scope", "group", "case", "fraction"});
  for (const auto& f : r.fractions) t.row({f.method, f.scope, f.group, f.case_id, format_number(f.fraction)});
  return t;
}

std::string ground_truth_report(const PhantomSpec& spec, const GroundTruth& truth) {
  std::ostringstream out;
  out << "shape = " << to_string(spec.shape) << '\n'
      << "seed = " << truth.seed << '\n'
      << "fiber_length_mm = " << format_number(truth.fiber_length_mm) << '\n'
      << "pennation_deg = " << format_number(truth.pennation_deg) << '\n'
      << "line_of_action = " << format_number(truth.line_of_action.x) << ' '
      << format_number(truth.line_of_action.y) << ' ' << format_number(truth.line_of_action.z) << '\n'
      << "muscle_length_mm = " << format_number(truth.muscle_length_mm) << '\n'
      << "volume_mm3 = " << format_number(truth.volume_mm3) << '\n';
  return out.str();
}

}  // namespace fss
