// fss: phantom generation, tracking, streamline filtering, tract metrics,
// muscle architecture and method comparison.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "fss/config.hpp"
#include "fss/error.hpp"
#include "fss/io.hpp"
#include "fss/phantom.hpp"
#include "fss/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fss;

namespace {

struct PhantomArgs {
  std::string shape = "box";
  std::string dims;
  PhantomSpec spec;
  std::string inclusion_radius;
  double scale = 1.0;
};

void add_phantom_options(CLI::App* cmd, PhantomArgs& a) {
  cmd->add_option("--shape", a.shape, "box | fusiform | arc")->capture_default_str();
  cmd->add_option("--pennation", a.spec.pennation_deg, "fiber angle to z, degrees (box)")->capture_default_str();
  cmd->add_option("--dims", a.dims, "extent in mm as XxYxZ (default 3x10x200)");
  cmd->add_option("--voxel", a.spec.voxel_mm, "isotropic voxel size, mm")->capture_default_str();
  cmd->add_option("--fa", a.spec.fa, "anisotropy inside the muscle")->capture_default_str();
  cmd->add_option("--radius", a.spec.radius_mm, "arc mid radius, mm")->capture_default_str();
  cmd->add_option("--thickness", a.spec.thickness_mm, "arc radial width, mm")->capture_default_str();
  cmd->add_option("--sweep", a.spec.sweep_deg, "arc sweep, degrees")->capture_default_str();
  cmd->add_option("--inclusions", a.spec.inclusions, "number of low-anisotropy inclusions")->capture_default_str();
  cmd->add_option("--inclusion-radius", a.inclusion_radius, "inclusion radius range in mm as MIN:MAX");
  cmd->add_flag("--holes", a.spec.inclusion_holes, "carve inclusions out of the mask");
  cmd->add_option("--jitter", a.spec.angular_jitter_deg, "Gaussian angular jitter, degrees")->capture_default_str();
  cmd->add_option("--seed", a.spec.seed, "random seed for inclusions and jitter")->capture_default_str();
  cmd->add_option("--scale", a.scale, "scale every length by this factor")->capture_default_str();
}

PhantomSpec build_spec(const PhantomArgs& a) {
  PhantomSpec spec = a.spec;
  spec.shape = parse_shape(a.shape);
  if (!a.dims.empty()) {
    double x = 0, y = 0, z = 0;
    char tail = 0;
    if (std::sscanf(a.dims.c_str(), "%lfx%lfx%lf%c", &x, &y, &z, &tail) != 3) {
      throw Error(ErrorKind::config, "--dims must look like 20x20x60");
    }
    spec.dims_mm = {x, y, z};
  }
  if (!a.inclusion_radius.empty()) {
    double lo = 0, hi = 0;
    char tail = 0;
    if (std::sscanf(a.inclusion_radius.c_str(), "%lf:%lf%c", &lo, &hi, &tail) != 2) {
      throw Error(ErrorKind::config, "--inclusion-radius must look like 1.5:3");
    }
    spec.inclusion_radius_min_mm = lo;
    spec.inclusion_radius_max_mm = hi;
  }
  if (a.scale != 1.0) {
    if (!(a.scale > 0.0)) throw Error(ErrorKind::invalid_spec, "--scale must be positive");
    spec = scaled(spec, a.scale);
  }
  return spec;
}

struct Overrides {
  std::optional<int> n_candidates, k, m, n_slices;
  std::optional<std::string> init_rule, sdcv_support, ml_source;
  std::optional<double> r2_threshold, seed_spacing;
  bool equalize = false;
};

RunConfig load_config(const std::string& path, const Overrides& o) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
  if (o.n_candidates) cfg.fss.n_candidates = *o.n_candidates;
  if (o.k) cfg.fss.k = *o.k;
  if (o.m) cfg.fss.m = *o.m;
  if (o.n_slices) cfg.n_slices = *o.n_slices;
  if (o.init_rule) cfg.fss.init_rule = parse_init_rule(*o.init_rule);
  if (o.sdcv_support) cfg.sdcv_support = parse_sdcv_support(*o.sdcv_support);
  if (o.ml_source) cfg.ml_source = parse_ml_source(*o.ml_source);
  if (o.r2_threshold) cfg.r2_threshold = *o.r2_threshold;
  if (o.seed_spacing) cfg.seed_spacing_mm = *o.seed_spacing;
  if (o.equalize) cfg.equalize_candidates = true;
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

void write_phantom(const PhantomSpec& spec, const std::string& prefix) {
  const auto ph = make_phantom(spec);
  save_mask(prefix + ".mskv", ph.mask);
  save_field(prefix + ".ornt", ph.field);
  write_file(prefix + ".truth.txt", ground_truth_report(spec, ph.truth));
}

DensityVolume density_volume(const DensityMap& map, bool normalized) {
  DensityVolume v{map.frame, {}};
  if (normalized) {
    v.values = map.normalized();
  } else {
    v.values.assign(map.counts.begin(), map.counts.end());
  }
  return v;
}

void write_compare(const CompareReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "runs.csv", runs_table(report).str());
  write_file(dir / "comparisons.csv", comparisons_table(report).str());
  if (!report.fractions.empty()) write_file(dir / "fractions.csv", fractions_table(report).str());
  const auto ba_dir = dir / "bland_altman";
  for (const auto& c : report.comparisons) {
    if (!c.agreement) continue;
    fs::create_directories(ba_dir);
    write_file(ba_dir / (c.metric + "_" + c.method_a + "_vs_" + c.method_b + ".csv"), bland_altman_table(c).str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Farthest streamline sampling and muscle architecture toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value run configuration file");
  };

  // phantom
  PhantomArgs phantom_args;
  std::string phantom_prefix = "phantom";
  auto* phantom = app.add_subcommand("phantom", "write a synthetic muscle mask, field and ground truth");
  add_phantom_options(phantom, phantom_args);
  phantom->add_option("-o,--out", phantom_prefix, "output prefix (.mskv, .ornt, .truth.txt)")->capture_default_str();

  // track
  std::string field_path, mask_path, out_path, strategy = "3ds";
  std::optional<std::size_t> count;
  std::optional<int> divisions;
  bool raw_tracks = false;
  auto* trackc = app.add_subcommand("track", "track streamlines through an orientation field");
  trackc->add_option("--field", field_path, "ORNT file")->required();
  trackc->add_option("--mask", mask_path, "MSKV file")->required();
  trackc->add_option("--strategy", strategy, "3ds | 2ds")->capture_default_str();
  trackc->add_option("--count", count, "exact number of tracks (seeds are densified as needed)");
  trackc->add_option("--spacing", ov.seed_spacing, "3D seed lattice spacing, mm");
  trackc->add_option("--divisions", divisions, "2D in-plane seeds per voxel edge");
  trackc->add_option("--n-slices", ov.n_slices, "slices for 2D seeding");
  trackc->add_flag("--raw", raw_tracks, "skip cubic fitting and surface extrapolation");
  trackc->add_option("-o,--out", out_path, "output STRL")->required();
  add_config(trackc);

  // filter
  std::string method = "fss", candidates_path, trace_path;
  auto* filter = app.add_subcommand("filter", "select k streamlines by fss, or re-track k by 2ds / 3ds");
  filter->add_option("--method", method, "fss | 2ds | 3ds")->capture_default_str();
  filter->add_option("-k", ov.k, "number of streamlines to keep");
  filter->add_option("-m", ov.m, "resampled points per streamline");
  filter->add_option("--init-rule", ov.init_rule, "longest | index");
  filter->add_option("--candidates", candidates_path, "candidate STRL (fss)");
  filter->add_option("--field", field_path, "ORNT file (2ds, 3ds)");
  filter->add_option("--mask", mask_path, "MSKV file (2ds, 3ds; optional frame check for fss)");
  filter->add_option("--trace", trace_path, "CSV of the fss selection order and distances");
  filter->add_option("-o,--out", out_path, "output STRL")->required();
  add_config(filter);

  // metrics
  std::string strl_path, density_path;
  bool normalized = false;
  auto* metrics = app.add_subcommand("metrics", "streamline coverage, density and its variation");
  metrics->add_option("--mask", mask_path, "MSKV file")->required();
  metrics->add_option("--strl", strl_path, "STRL file")->required();
  metrics->add_option("--sdcv-support", ov.sdcv_support, "all | nonzero");
  metrics->add_option("--density", density_path, "write the density map (DENS)");
  metrics->add_flag("--normalized", normalized, "divide the density map by its maximum");
  metrics->add_option("-o,--out", out_path, "CSV output (default stdout)");
  add_config(metrics);

  // arch
  auto* arch = app.add_subcommand("arch", "muscle architecture from tracts");
  arch->add_option("--mask", mask_path, "MSKV file")->required();
  arch->add_option("--strl", strl_path, "STRL file")->required();
  arch->add_option("--r2-threshold", ov.r2_threshold, "endpoint-fit acceptance threshold");
  arch->add_option("--ml-source", ov.ml_source, "tracts | mask");
  arch->add_option("-o,--out", out_path, "CSV output (default stdout)");
  add_config(arch);

  // compare
  std::string manifest_path, out_dir = "compare";
  auto* compare = app.add_subcommand("compare", "compare methods across cases");
  compare->add_option("--manifest", manifest_path, "CSV with case,method,mask,strl[,group]")->required();
  compare->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  compare->add_option("--sdcv-support", ov.sdcv_support, "all | nonzero");
  compare->add_option("--r2-threshold", ov.r2_threshold, "endpoint-fit acceptance threshold");
  compare->add_option("--ml-source", ov.ml_source, "tracts | mask");
  add_config(compare);

  // run
  PhantomArgs run_args;
  std::string run_dir;
  auto* run = app.add_subcommand("run", "phantom, candidates, fss / 3ds / 2ds, metrics and architecture");
  add_phantom_options(run, run_args);
  run->add_option("--out-dir", run_dir, "output directory (default: config output_dir)");
  run->add_option("--n-candidates", ov.n_candidates, "candidate tracks for fss");
  run->add_option("-k", ov.k, "tracks per method");
  run->add_flag("--equalize-candidates", ov.equalize, "baselines also subsample from n_candidates tracks");
  add_config(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (phantom->parsed()) {
      write_phantom(build_spec(phantom_args), phantom_prefix);
      return 0;
    }

    const RunConfig cfg = load_config(config_path, ov);
    validate(cfg);

    if (trackc->parsed()) {
      const auto field = load_field(field_path);
      const auto mask = load_mask(mask_path);
      const auto strat = strategy == "2ds" ? SeedStrategy::slices_2d
                         : strategy == "3ds" ? SeedStrategy::volume_3d
                                             : throw Error(ErrorKind::config, "--strategy must be 2ds or 3ds");
      StreamlineSet set;
      if (count) {
        if (raw_tracks) throw Error(ErrorKind::config, "--raw cannot be combined with --count");
        set = generate_tracks(field, mask, strat, *count, cfg).set;
      } else {
        SeedSet seeds;
        if (strat == SeedStrategy::volume_3d) {
          if (!(cfg.seed_spacing_mm > 0.0)) throw Error(ErrorKind::config, "3ds needs --count or --spacing");
          seeds = seeds_3d(mask, cfg.seed_spacing_mm);
        } else {
          seeds = seeds_2d(mask, cfg.n_slices, divisions.value_or(1));
        }
        set = raw_tracks ? track(field, mask, seeds, cfg.tracking).set
                         : track_and_postprocess(field, mask, seeds, cfg.tracking);
      }
      save_streamlines(out_path, set);
      std::cerr << "tracks: " << set.size() << '\n';
      return 0;
    }

    if (filter->parsed()) {
      const Method m = parse_method(method);
      StreamlineSet out;
      if (m == Method::fss) {
        if (candidates_path.empty()) throw Error(ErrorKind::config, "fss needs --candidates");
        const auto candidates = load_streamlines(candidates_path);
        if (!mask_path.empty()) check_frame(candidates, load_mask(mask_path));
        FssConfig fc = cfg.fss;
        if (!ov.k) fc.k = std::min<int>(fc.k, static_cast<int>(candidates.size()));
        auto result = fss_filter(candidates, fc);
        out = std::move(result.selected);
        if (!trace_path.empty()) {
          CsvTable t({"step", "id", "selection_distance"});
          for (std::size_t i = 0; i < result.trace.ids.size(); ++i) {
            t.row({std::to_string(i), std::to_string(result.trace.ids[i]),
                   format_number(result.trace.selection_distance[i])});
          }
          write_file(trace_path, t.str());
        }
      } else {
        if (field_path.empty() || mask_path.empty()) throw Error(ErrorKind::config, "2ds / 3ds need --field and --mask");
        const auto field = load_field(field_path);
        const auto mask = load_mask(mask_path);
        const auto strat = m == Method::volume_3d ? SeedStrategy::volume_3d : SeedStrategy::slices_2d;
        out = generate_tracks(field, mask, strat, static_cast<std::size_t>(cfg.fss.k), cfg).set;
      }
      save_streamlines(out_path, out);
      return 0;
    }

    if (metrics->parsed()) {
      const auto mask = load_mask(mask_path);
      const auto set = load_streamlines(strl_path);
      check_frame(set, mask);
      const auto d = density(set, mask, cfg.sdcv_support);
      auto t = metrics_table();
      add_metrics_row(t, fs::path(strl_path).stem().string(), d.metrics, cfg.sdcv_support, set.size());
      emit(out_path, t.str());
      if (!density_path.empty()) save_density(density_path, density_volume(d.map, normalized));
      return 0;
    }

    if (arch->parsed()) {
      const auto mask = load_mask(mask_path);
      const auto set = load_streamlines(strl_path);
      check_frame(set, mask);
      auto t = arch_table();
      add_arch_row(t, fs::path(strl_path).stem().string(), summarize(mask, set, cfg.r2_threshold, cfg.ml_source));
      emit(out_path, t.str());
      return 0;
    }

    if (compare->parsed()) {
      write_compare(compare_manifest(manifest_path, cfg), out_dir);
      return 0;
    }

    if (run->parsed()) {
      const fs::path dir = run_dir.empty() ? fs::path(cfg.output_dir) : fs::path(run_dir);
      fs::create_directories(dir);
      const auto spec = build_spec(run_args);
      const auto ph = make_phantom(spec);
      save_mask(dir / "phantom.mskv", ph.mask);
      save_field(dir / "phantom.ornt", ph.field);
      write_file(dir / "phantom.truth.txt", ground_truth_report(spec, ph.truth));
      write_file(dir / "run.cfg", to_text(cfg));

      const auto result = run_pipeline(ph.field, ph.mask, cfg);
      save_streamlines(dir / "candidates.strl", result.candidates);
      auto mt = metrics_table();
      auto at = arch_table();
      std::vector<RunRecord> records;
      for (const auto& r : result.runs) {
        const auto name = to_string(r.method);
        save_streamlines(dir / (name + ".strl"), r.tracts);
        save_density(dir / (name + ".dens"), density_volume(r.eval.density.map, true));
        add_metrics_row(mt, name, r.eval.density.metrics, cfg.sdcv_support, r.tracts.size());
        add_arch_row(at, name, r.eval.arch);
        records.push_back({"phantom", name, "", ph.mask.frame(), r.eval.density.metrics, r.eval.arch, r.tracts.size()});
      }
      write_file(dir / "metrics.csv", mt.str());
      write_file(dir / "arch.csv", at.str());
      write_compare(compare_runs(std::move(records)), dir / "compare");
      std::cout << mt.str();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
