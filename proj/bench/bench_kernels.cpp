// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "fss/pipeline.hpp"
#include "fss/reference.hpp"

using namespace fss;

namespace {

struct Fixture {
  Phantom phantom;
  StreamlineSet candidates;
  PackedStreamlines packed;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out{make_phantom(PhantomSpec{}), {}, {}};
    out.candidates = generate_tracks(out.phantom.field, out.phantom.mask, SeedStrategy::volume_3d, 10000, RunConfig{}).set;
    out.packed = pack(out.candidates, kDefaultResampleCount);
    return out;
  }();
  return f;
}

void BM_fss_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::fss_traverse(f.packed, 3000, InitRule::longest));
}

void BM_fss_openmp(benchmark::State& state) {
  const auto& f = fixture();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fss_traverse(f.packed, 3000, InitRule::longest));
}

void BM_density_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::density_map(f.candidates, f.phantom.mask));
}

void BM_density_openmp(benchmark::State& state) {
  const auto& f = fixture();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(density(f.candidates, f.phantom.mask));
}

}  // namespace

BENCHMARK(BM_fss_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fss_openmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_density_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_density_openmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
