#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "fss/error.hpp"
#include "fss/pipeline.hpp"

using namespace fss;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::config;
}

StreamlineSet numbered(int n) {
  StreamlineSet s;
  for (int i = 0; i < n; ++i) s.streamlines.push_back({{{0.0, 0.0, 1.0 * i}, {1.0, 0.0, 1.0 * i}}, i});
  return s;
}

RunRecord record(const std::string& c, const std::string& m, double sc, double fl, const std::string& group = "") {
  RunRecord r;
  r.case_id = c;
  r.method = m;
  r.group = group;
  r.metrics.sc = sc;
  r.metrics.sdcv = 0.5 * sc;
  r.arch.fl_median = fl;
  r.arch.mv = 10.0 * fl;
  r.arch.pcsa = sc;
  r.streamlines = 10;
  return r;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.fss.n_candidates = 400;
  cfg.fss.k = 100;
  return cfg;
}

PhantomSpec small_box() {
  PhantomSpec s;
  s.dims_mm = {4, 8, 40};
  return s;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::fss, Method::slices_2d, Method::volume_3d}) CHECK(parse_method(to_string(m)) == m);
  CHECK(to_string(Method::slices_2d) == "2ds");
  CHECK(kind_of([] { parse_method("4ds"); }) == ErrorKind::config);
}

TEST_CASE("subset and random_subset") {
  const auto s = numbered(50);
  const auto sub = subset(s, {3, 1, 49});
  CHECK(sub.streamlines[0].id == 3);
  CHECK(sub.streamlines[2].id == 49);

  const auto r = random_subset(s, 20, 9);
  CHECK(r.size() == 20);
  std::set<StreamlineId> ids;
  for (const auto& t : r.streamlines) ids.insert(t.id);
  CHECK(ids.size() == 20);
  CHECK(std::is_sorted(r.streamlines.begin(), r.streamlines.end(),
                       [](const auto& a, const auto& b) { return a.id < b.id; }));
  CHECK(random_subset(s, 20, 9).streamlines == r.streamlines);
  CHECK(random_subset(s, 50, 1).streamlines == s.streamlines);
  CHECK(random_subset(s, 0, 1).empty());
  CHECK(kind_of([&] { random_subset(s, 51, 1); }) == ErrorKind::arity);

  std::vector<int> hits(50, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    for (const auto& t : random_subset(s, 10, seed).streamlines) ++hits[static_cast<std::size_t>(t.id)];
  }
  for (int h : hits) CHECK(std::abs(h - 400) < 100);
}

TEST_CASE("generate_tracks yields exact counts") {
  const auto ph = make_phantom(small_box());
  const auto cfg = small_config();
  for (std::size_t target : {1u, 37u, 500u}) {
    const auto g3 = generate_tracks(ph.field, ph.mask, SeedStrategy::volume_3d, target, cfg);
    CHECK(g3.set.size() == target);
    CHECK(g3.produced >= target);
    const auto g2 = generate_tracks(ph.field, ph.mask, SeedStrategy::slices_2d, target, cfg);
    CHECK(g2.set.size() == target);
    CHECK(g2.divisions >= 1);
  }
  CHECK(kind_of([&] { generate_tracks(ph.field, ph.mask, SeedStrategy::volume_3d, 0, cfg); }) == ErrorKind::arity);
}

TEST_CASE("run_pipeline produces every method at k tracks") {
  const auto ph = make_phantom(small_box());
  const auto cfg = small_config();
  const auto res = run_pipeline(ph.field, ph.mask, cfg);
  CHECK(res.candidates.size() == 400);
  REQUIRE(res.runs.size() == 3);
  for (const auto& r : res.runs) {
    CHECK(r.tracts.size() == 100);
    CHECK(r.eval.density.metrics.sc > 0.0);
    CHECK(r.trace.has_value() == (r.method == Method::fss));
  }
  const auto& tr = *res.runs[0].trace;
  CHECK(tr.ids.size() == 100);

  auto eq = cfg;
  eq.equalize_candidates = true;
  const auto res2 = run_pipeline(ph.field, ph.mask, eq, {Method::volume_3d});
  CHECK(res2.runs[0].tracts.size() == 100);
  CHECK(res2.candidates.size() == 400);

  auto bad = cfg;
  bad.fss.k = 401;
  CHECK(kind_of([&] { run_pipeline(ph.field, ph.mask, bad); }) == ErrorKind::config);
}

TEST_CASE("compare_runs") {
  std::vector<RunRecord> runs;
  for (int c = 0; c < 4; ++c) {
    runs.push_back(record("c" + std::to_string(c), "fss", 0.9 + 0.01 * c, 50.0 + c, c < 2 ? "flexor" : "extensor"));
    runs.push_back(record("c" + std::to_string(c), "3ds", 0.8 + 0.02 * c, 55.0 + c, c < 2 ? "flexor" : "extensor"));
  }
  const auto rep = compare_runs(runs);
  CHECK(rep.comparisons.size() == comparison_metrics().size());
  const auto& sc = rep.comparisons[0];
  CHECK(sc.metric == "sc");
  CHECK(sc.method_a == "fss");
  CHECK(sc.method_b == "3ds");
  CHECK(sc.a.size() == 4);
  REQUIRE(sc.t.has_value());
  CHECK(sc.t->t > 0.0);
  CHECK(sc.agreement.has_value());

  const auto& fl = rep.comparisons[3];
  CHECK(fl.metric == "fl_median");
  CHECK(fl.t->degenerate);
  CHECK(fl.agreement->mean_diff == -5.0);

  double vol = 0.0;
  std::map<std::pair<std::string, std::string>, double> pcsa;
  for (const auto& f : rep.fractions) {
    if (f.method != "fss") continue;
    if (f.scope == "volume") vol += f.fraction;
    if (f.scope == "pcsa") pcsa[{f.method, f.group}] += f.fraction;
  }
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-12));
  for (auto [_, v] : pcsa) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(runs_table(rep).rows() == 8);
  CHECK(comparisons_table(rep).rows() == rep.comparisons.size());
  CHECK(bland_altman_table(sc).rows() == 4);
  CHECK(fractions_table(rep).rows() == rep.fractions.size());
}

TEST_CASE("compare_runs on identical runs") {
  std::vector<RunRecord> runs;
  for (int c = 0; c < 5; ++c) {
    runs.push_back(record("c" + std::to_string(c), "a", 0.5 + 0.1 * c, 40.0 + 3 * c));
    runs.push_back(record("c" + std::to_string(c), "b", 0.5 + 0.1 * c, 40.0 + 3 * c));
  }
  const auto rep = compare_runs(runs);
  for (const auto& c : rep.comparisons) {
    CAPTURE(c.metric);
    if (!c.t) continue;
    CHECK(c.t->t == 0.0);
    CHECK(c.t->p == 1.0);
    CHECK(c.agreement->mean_diff == 0.0);
    if (c.percent) CHECK(c.percent->value == 0.0);
  }
  CHECK(rep.fractions.empty());
}

TEST_CASE("compare_runs errors and skips") {
  std::vector<RunRecord> one{record("c0", "a", 0.5, 1.0)};
  CHECK(kind_of([&] { compare_runs(one); }) == ErrorKind::arity);

  auto a = record("c0", "a", 0.5, 1.0);
  auto b = record("c0", "b", 0.5, 1.0);
  b.frame.dims = {2, 2, 2};
  CHECK(kind_of([&] { compare_runs({a, b}); }) == ErrorKind::frame_mismatch);
  CHECK(kind_of([&] { compare_runs({a, a, record("c0", "b", 0.5, 1.0)}); }) == ErrorKind::config);

  auto nan_run = record("c1", "b", 0.5, 1.0);
  nan_run.metrics.sdcv = NAN;
  const auto rep = compare_runs({a, record("c0", "b", 0.4, 1.0), record("c1", "a", 0.6, 1.0), nan_run,
                                 record("c2", "a", 0.7, 1.0)});
  const auto it = std::find_if(rep.comparisons.begin(), rep.comparisons.end(),
                               [](const auto& c) { return c.metric == "sdcv"; });
  CHECK(it->skipped == 2);
  CHECK(it->a.size() == 1);
  CHECK(!it->t.has_value());
  CHECK(it->percent.has_value());
}

TEST_CASE("compare_manifest reads masks and tracts from disk") {
  const auto dir = std::filesystem::temp_directory_path() / ("fss_manifest_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto ph = make_phantom(small_box());
  const auto cfg = small_config();
  const auto res = run_pipeline(ph.field, ph.mask, cfg, {Method::fss, Method::volume_3d});
  save_mask(dir / "m.mskv", ph.mask);
  save_streamlines(dir / "fss.strl", res.runs[0].tracts);
  save_streamlines(dir / "3ds.strl", res.runs[1].tracts);
  write_file(dir / "manifest.csv",
             "case,method,mask,strl\nbox,fss,m.mskv,fss.strl\nbox,3ds,m.mskv,3ds.strl\n"
             "box2,fss,m.mskv,fss.strl\nbox2,3ds,m.mskv,3ds.strl\n");
  const auto rep = compare_manifest(dir / "manifest.csv", cfg);
  CHECK(rep.runs.size() == 4);
  CHECK(rep.runs[0].metrics.sc == doctest::Approx(res.runs[0].eval.density.metrics.sc).epsilon(1e-6));
  CHECK(rep.comparisons[0].a.size() == 2);

  write_file(dir / "bad.csv", "box,fss,m.mskv\n");
  CHECK(kind_of([&] { compare_manifest(dir / "bad.csv", cfg); }) == ErrorKind::format);
  write_file(dir / "far.csv", "box,fss,m.mskv,far.strl\nbox,3ds,m.mskv,3ds.strl\n");
  save_streamlines(dir / "far.strl", StreamlineSet{{Streamline{{{500, 0, 0}, {501, 0, 0}}, 0}}});
  CHECK(kind_of([&] { compare_manifest(dir / "far.csv", cfg); }) == ErrorKind::frame_mismatch);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ground truth report names the truth fields") {
  const auto spec = small_box();
  const auto ph = make_phantom(spec);
  const auto text = ground_truth_report(spec, ph.truth);
  CHECK(text.find("fiber_length_mm") != std::string::npos);
  CHECK(text.find("pennation_deg") != std::string::npos);
}
