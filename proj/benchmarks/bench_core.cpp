#include <benchmark/benchmark.h>

#include <vector>

#include "yamabe/bundle.hpp"
#include "yamabe/charclass.hpp"
#include "yamabe/cocycle.hpp"
#include "yamabe/graded.hpp"
#include "yamabe/metric.hpp"

#include "support/generators.hpp"

namespace {

yamabe::RingContextPtr pontryagin_ring(int d) {
  std::vector<yamabe::Generator> gens;
  for (int i = 1; i <= d; ++i) gens.push_back({"p" + std::to_string(i), 4 * i});
  return yamabe::RingContext::create(gens, 4 * d);
}

void BM_AhatClass(benchmark::State& state) {
  int d = static_cast<int>(state.range(0));
  yamabe::RingContextPtr ctx = pontryagin_ring(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(yamabe::ahat_class(ctx, d));
  }
}
BENCHMARK(BM_AhatClass)->Arg(2)->Arg(4)->Arg(6);

void BM_GradedMul(benchmark::State& state) {
  int d = static_cast<int>(state.range(0));
  yamabe::RingContextPtr ctx = pontryagin_ring(d);
  yamabe::GradedElement a = yamabe::ahat_class(ctx, d);
  yamabe::GradedElement b = a + yamabe::GradedElement::one(ctx);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mul(a, b));
  }
}
BENCHMARK(BM_GradedMul)->Arg(4)->Arg(6);

void BM_IndexPipelines(benchmark::State& state) {
  gen::Rng rng(20240811);
  gen::SpecSample sample;
  // Largest supported shape: 12-dimensional base, fiber rank 8.
  do {
    sample = gen::random_bundle_spec(rng);
  } while (sample.d != 3 || sample.k != 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(yamabe::index_pipelines(sample.spec));
  }
}
BENCHMARK(BM_IndexPipelines);

void BM_CertifyReference(benchmark::State& state) {
  yamabe::BundleSpec spec;
  spec.base.dimension = 4;
  spec.base.spin = true;
  spec.base.numbers["p1"] = -48;
  spec.fiber_rank = 2;
  spec.cocycle.nerve.charts = {"U1", "U2"};
  spec.cocycle.nerve.pairs = {{"U1", "U2"}, {"U2", "U1"}};
  spec.cocycle.maps.emplace(std::make_pair(std::string("U1"), std::string("U2")),
                            yamabe::IntAffineMap::identity(2));
  spec.cocycle.maps.emplace(std::make_pair(std::string("U2"), std::string("U1")),
                            yamabe::IntAffineMap::identity(2));
  spec.omega_is_generator = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(yamabe::certify_zero_yamabe(spec));
  }
}
BENCHMARK(BM_CertifyReference);

void BM_ValidateCocycle(benchmark::State& state) {
  gen::Rng rng(20240812);
  yamabe::Cocycle c =
      gen::coboundary_cocycle(rng, 3, static_cast<int>(state.range(0)), true, 4).cocycle;
  for (auto _ : state) {
    benchmark::DoNotOptimize(yamabe::validate_cocycle(c, true));
  }
}
BENCHMARK(BM_ValidateCocycle)->Arg(4)->Arg(8);

void BM_LatticeCover(benchmark::State& state) {
  gen::Rng rng(20240813);
  yamabe::Cocycle c = gen::coboundary_cocycle(rng, 3, 6, false).cocycle;
  for (auto _ : state) {
    benchmark::DoNotOptimize(yamabe::lattice_cover(c, 4));
  }
}
BENCHMARK(BM_LatticeCover);

void BM_DecayRate(benchmark::State& state) {
  gen::Rng rng(20240814);
  yamabe::BlockMetric h = gen::random_block_metric(rng, 8, 6, 1e3, 4);
  std::vector<long> n_set{1, 2, 4, 8, 16, 32, 64};
  for (auto _ : state) {
    benchmark::DoNotOptimize(yamabe::decay_rate(h, 3, n_set));
  }
}
BENCHMARK(BM_DecayRate);

}  // namespace

BENCHMARK_MAIN();
