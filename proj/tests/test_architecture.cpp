#include <doctest.h>

#include <cmath>
#include <random>

#include "fss/architecture.hpp"
#include "fss/error.hpp"
#include "fss/phantom.hpp"
#include "fss/pipeline.hpp"
#include "oracles.hpp"

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

Streamline line(Point3 a, Point3 b, StreamlineId id) { return {{a, b}, id}; }

const StreamlineSet& unipennate_tracts() {
  static const StreamlineSet set = [] {
    const auto ph = make_phantom(PhantomSpec{});
    RunConfig cfg;
    return generate_tracks(ph.field, ph.mask, SeedStrategy::volume_3d, 400, cfg).set;
  }();
  return set;
}

Point3 rotate(Point3 p, double yaw, double pitch) {
  const Point3 q{p.x * std::cos(yaw) - p.y * std::sin(yaw), p.x * std::sin(yaw) + p.y * std::cos(yaw), p.z};
  return {q.x, q.y * std::cos(pitch) - q.z * std::sin(pitch), q.y * std::sin(pitch) + q.z * std::cos(pitch)};
}

}  // namespace

TEST_CASE("muscle volume") {
  GridFrame f;
  f.dims = {10, 10, 10};
  VoxelMask m(f);
  for (std::size_t i = 0; i < f.voxel_count(); ++i) m.set(f.unlinear(i), true);
  CHECK(muscle_volume(m) == 1000.0);

  GridFrame g;
  g.dims = {2, 3, 4};
  g.voxel_size = {0.8, 0.8, 0.5};
  VoxelMask small(g);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) small.set(g.unlinear(i), true);
  CHECK(muscle_volume(small) == doctest::Approx(24 * 0.32).epsilon(1e-15));

  PhantomSpec s;
  s.shape = PhantomShape::fusiform;
  s.dims_mm = {30, 24, 80};
  const auto ph = make_phantom(s);
  CHECK(std::abs(muscle_volume(ph.mask) / ph.truth.volume_mm3 - 1.0) < 0.05);

  CHECK(kind_of([&] { muscle_volume(VoxelMask(f)); }) == ErrorKind::empty_domain);
}

TEST_CASE("fit_line: collinear points give r2 = 1 and a positive dominant component") {
  std::vector<Point3> pts;
  for (int i = 0; i < 9; ++i) pts.push_back(Point3{1, 2, 3} + Point3{-2, 0.5, 1} * (i - 4.0));
  const auto fit = fit_line(pts);
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.direction.x > 0.0);
  CHECK(std::abs(dot(fit.direction, normalized(Point3{-2, 0.5, 1}))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm(fit.centroid - Point3{1, 2, 3}) < 1e-12);
  CHECK(kind_of([] { fit_line({{1, 1, 1}, {1, 1, 1}}); }) == ErrorKind::degenerate_geometry);
  CHECK(kind_of([] { fit_line({{1, 1, 1}}); }) == ErrorKind::degenerate_geometry);
}

TEST_CASE("fit_line matches the Jacobi principal axis on random clouds") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Point3 axis = normalized(Point3{g(rng), g(rng), g(rng)});
    std::vector<Point3> pts;
    for (int i = 0; i < 40; ++i) {
      const double t = 10.0 * g(rng);
      pts.push_back(axis * t + Point3{g(rng), g(rng), g(rng)} * (0.3 + 0.1 * (trial % 5)));
    }
    const auto got = fit_line(pts);
    const auto want = oracle::principal_axis(pts);
    CHECK(std::abs(std::abs(dot(got.direction, want.direction)) - 1.0) < 1e-9);
    CHECK(got.r2 == doctest::Approx(want.r2).epsilon(1e-9));
    CHECK(norm(got.centroid - want.centroid) < 1e-12);
  }
}

TEST_CASE("line of action: endpoint fit on a pennate layout") {
  StreamlineSet set;
  for (int i = 0; i < 8; ++i) {
    const double z = 5.0 * i;
    set.streamlines.push_back(line({0, 0, z}, {3, 0, z + 6}, i));
  }
  const auto loa = line_of_action(set);
  CHECK(loa.source == LoaSource::endpoint_fit);
  CHECK(loa.r2 > 0.9);
  CHECK(loa.direction.z > 0.9);
  const auto arch_pa = pennation_angle(set.streamlines[0], loa);
  CHECK(arch_pa > 5.0);
}

TEST_CASE("line of action: spherical endpoint cloud falls back to the mean chord") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  StreamlineSet set;
  for (int i = 0; i < 200; ++i) {
    const Point3 u = normalized(Point3{g(rng), g(rng), g(rng)});
    const Point3 c{0.1 * g(rng), 0.1 * g(rng), 0.1 * g(rng)};
    set.streamlines.push_back(line(c - u * 10.0, c + u * 10.0, i));
  }
  const auto loa = line_of_action(set);
  CHECK(loa.r2 < 0.5);
  CHECK(loa.source == LoaSource::mean_direction);
  CHECK(norm(loa.direction) == doctest::Approx(1.0).epsilon(1e-12));
  const auto arch = summarize(VoxelMask([] {
                                GridFrame f;
                                f.dims = {3, 3, 3};
                                return f;
                              }(), std::vector<std::uint8_t>(27, 1)),
                              set);
  CHECK(arch.arch_type == ArchType::non_pennate);
}

TEST_CASE("line of action arity and threshold") {
  StreamlineSet two{{line({0, 0, 0}, {0, 0, 1}, 0), line({1, 0, 0}, {1, 0, 1}, 1)}};
  CHECK(kind_of([&] { line_of_action(two); }) == ErrorKind::arity);

  StreamlineSet set;
  for (int i = 0; i < 6; ++i) set.streamlines.push_back(line({0.0, 0.0, 4.0 * i}, {1.0, 0.0, 4.0 * i + 1.0}, i));
  const auto r2 = line_of_action(set).r2;
  CHECK(line_of_action(set, r2 - 1e-9).source == LoaSource::endpoint_fit);
  CHECK(line_of_action(set, r2).source == LoaSource::mean_direction);
}

TEST_CASE("line of action on a tracked unipennate phantom agrees with the Jacobi oracle") {
  const auto& set = unipennate_tracts();
  std::vector<Point3> ends;
  for (const auto& s : set.streamlines) {
    ends.push_back(s.points.front());
    ends.push_back(s.points.back());
  }
  const auto loa = line_of_action(set);
  const auto want = oracle::principal_axis(ends);
  CHECK(std::abs(std::abs(dot(loa.direction, want.direction)) - 1.0) < 1e-9);
  CHECK(loa.r2 == doctest::Approx(want.r2).epsilon(1e-9));
  CHECK(loa.r2 > 0.9);
  CHECK(loa.source == LoaSource::endpoint_fit);
  CHECK(angle_deg(loa.direction, {0, 0, 1}) < 1.0);
}

TEST_CASE("pennation angle") {
  LineOfAction loa;
  loa.direction = {0, 0, 1};
  CHECK(pennation_angle(line({0, 0, 0}, {0, 0, 5}, 0), loa) == 0.0);
  CHECK(pennation_angle(line({0, 0, 5}, {0, 0, 0}, 0), loa) == 0.0);
  CHECK(pennation_angle(line({0, 0, 0}, {3, 0, 0}, 0), loa) == doctest::Approx(90.0).epsilon(1e-14));
  CHECK(pennation_angle(line({0, 0, 0}, {1, 0, 1}, 0), loa) == doctest::Approx(45.0).epsilon(1e-13));
  CHECK(pennation_angle(line({0, 0, 0}, {-1, 0, -1}, 0), loa) == doctest::Approx(45.0).epsilon(1e-13));
  CHECK(kind_of([&] { pennation_angle(line({1, 1, 1}, {1, 1, 1}, 0), loa); }) == ErrorKind::degenerate_geometry);
  CHECK(kind_of([&] { pennation_angle(Streamline{{{1, 1, 1}}, 0}, loa); }) == ErrorKind::degenerate_geometry);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Point3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const Point3 d = normalized(Point3{u(rng), u(rng), u(rng)});
    LineOfAction l;
    l.direction = d;
    const double yaw = 3 * u(rng), pitch = 3 * u(rng);
    LineOfAction lr;
    lr.direction = rotate(d, yaw, pitch);
    const double p0 = pennation_angle(line(a, b, 0), l);
    const double p1 = pennation_angle(line(rotate(a, yaw, pitch), rotate(b, yaw, pitch), 0), lr);
    CHECK(p0 == doctest::Approx(p1).epsilon(1e-9));
    CHECK(p0 >= 0.0);
    CHECK(p0 <= 90.0);
  }
}

TEST_CASE("muscle length") {
  LineOfAction loa;
  loa.direction = {0, 0, 1};
  StreamlineSet set{{line({0, 0, 0}, {0, 0, 60}, 0)}};
  CHECK(muscle_length(set, loa) == 60.0);
  StreamlineSet staggered{{line({0, 0, 0}, {2, 0, 30}, 0), line({5, 0, 25}, {7, 0, 55}, 1)}};
  CHECK(muscle_length(staggered, loa) == 55.0);
  CHECK(kind_of([&] { muscle_length(StreamlineSet{}, loa); }) == ErrorKind::arity);

  GridFrame f;
  f.dims = {2, 2, 8};
  VoxelMask m(f, std::vector<std::uint8_t>(32, 1));
  CHECK(muscle_length(m, loa) == 7.0);

  const auto& tracts = unipennate_tracts();
  const auto tl = line_of_action(tracts);
  const auto truth = make_phantom(PhantomSpec{}).truth;
  CHECK(std::abs(muscle_length(tracts, tl) / truth.muscle_length_mm - 1.0) < 0.02);
}

TEST_CASE("summarize: pcsa identity and classification") {
  GridFrame f;
  f.dims = {10, 10, 10};
  VoxelMask m(f, std::vector<std::uint8_t>(1000, 1));
  StreamlineSet straight;
  for (int i = 0; i < 5; ++i) straight.streamlines.push_back(line({0.5 + i, 0.5, 0.0}, {0.5 + i, 0.5, 50.0}, i));
  LineOfAction z;
  z.direction = {0, 0, 1};
  const auto a = summarize(m, straight, z);
  CHECK(a.pcsa == 20.0);
  CHECK(a.fl_median == 50.0);
  CHECK(a.pa_median == 0.0);
  CHECK(a.mv == 1000.0);
  CHECK(a.fl_ml_ratio == 1.0);

  StreamlineSet tilted;
  for (int i = 0; i < 5; ++i) {
    const Point3 s{0.5 + i, 0.5, 0.0};
    tilted.streamlines.push_back(line(s, s + Point3{std::sqrt(3.0) * 25.0, 0.0, 25.0}, i));
  }
  LineOfAction x;
  x.direction = {1, 0, 0};
  const auto b = summarize(m, tilted, x);
  CHECK(b.pa_median == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(b.pcsa == doctest::Approx(1000.0 * std::cos(M_PI / 6) / 50.0).epsilon(1e-12));
  CHECK(b.pcsa == b.mv * std::cos(b.pa_median * M_PI / 180.0) / b.fl_median);

  LineOfAction fitted = z;
  fitted.source = LoaSource::endpoint_fit;
  fitted.r2 = 0.95;
  CHECK(summarize(m, straight, fitted).arch_type == ArchType::pennate);
  CHECK(summarize(m, straight, z, MlSource::mask).ml == 9.0);
  CHECK(kind_of([&] { summarize(m, StreamlineSet{}, z); }) == ErrorKind::arity);
}

TEST_CASE("group fractions") {
  std::vector<GroupedMuscle> one{{"flexor", "a", {}}};
  one[0].arch.mv = 5.0;
  one[0].arch.pcsa = 2.0;
  const auto f1 = group_fractions(one);
  CHECK(f1.volume_fraction.at("flexor") == 1.0);
  CHECK(f1.pcsa_fraction == std::vector<double>{1.0});

  std::vector<GroupedMuscle> rs(3);
  rs[0] = {"flexor", "a", {}};
  rs[1] = {"flexor", "b", {}};
  rs[2] = {"extensor", "c", {}};
  rs[0].arch.mv = 10;
  rs[0].arch.pcsa = 1;
  rs[1].arch.mv = 20;
  rs[1].arch.pcsa = 3;
  rs[2].arch.mv = 10;
  rs[2].arch.pcsa = 7;
  const auto f = group_fractions(rs);
  CHECK(f.volume_fraction.at("flexor") == 0.75);
  CHECK(f.volume_fraction.at("extensor") == 0.25);
  CHECK(f.pcsa_fraction == std::vector<double>{0.25, 0.75, 1.0});
  CHECK(kind_of([] { group_fractions({}); }) == ErrorKind::arity);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 10);
  std::vector<GroupedMuscle> many;
  for (int i = 0; i < 30; ++i) {
    GroupedMuscle g{"g" + std::to_string(i % 4), "m" + std::to_string(i), {}};
    g.arch.mv = u(rng);
    g.arch.pcsa = u(rng);
    many.push_back(g);
  }
  const auto fm = group_fractions(many);
  double sum = 0;
  for (auto [_, v] : fm.volume_fraction) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  std::map<std::string, double> per_group;
  for (std::size_t i = 0; i < many.size(); ++i) per_group[many[i].group] += fm.pcsa_fraction[i];
  for (auto [_, v] : per_group) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("architecture scales with the phantom") {
  RunConfig cfg;
  PhantomSpec base;
  base.dims_mm = {3, 10, 60};
  const auto p1 = make_phantom(base);
  const auto p2 = make_phantom(scaled(base, 2.0));
  const auto t1 = generate_tracks(p1.field, p1.mask, SeedStrategy::volume_3d, 300, cfg).set;
  const auto t2 = generate_tracks(p2.field, p2.mask, SeedStrategy::volume_3d, 300, cfg).set;
  const auto a1 = summarize(p1.mask, t1);
  const auto a2 = summarize(p2.mask, t2);
  CHECK(a2.mv / a1.mv == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(std::abs(a2.fl_median / a1.fl_median / 2.0 - 1.0) < 0.03);
  CHECK(std::abs(a2.pcsa / a1.pcsa / 4.0 - 1.0) < 0.03);
  // A short box tilts the endpoint-fit axis; against the true axis the angle is exact.
  LineOfAction z;
  z.direction = {0, 0, 1};
  for (const auto* pair : {&t1, &t2}) {
    const auto a = summarize(p1.mask, *pair, z);
    CHECK(std::abs(a.pa_median - 10.0) < 0.5);
  }
  CHECK(std::abs(a1.pa_median - 10.0) < angle_deg(a1.loa.direction, z.direction) + 0.5);
  CHECK(std::abs(a2.pa_median - 10.0) < angle_deg(a2.loa.direction, z.direction) + 0.5);
}
