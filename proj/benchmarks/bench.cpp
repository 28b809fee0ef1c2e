#include <random>

#include <benchmark/benchmark.h>

#include "dpw/integrator.hpp"
#include "dpw/iwasawa.hpp"
#include "dpw/monodromy.hpp"
#include "dpw/path.hpp"
#include "dpw/potential.hpp"
#include "dpw/solver.hpp"

namespace {

dpw::LaurentMatrixLoop random_loop(std::mt19937_64& rng, int span,
                                   double amp) {
  std::uniform_real_distribution<double> uni(-amp, amp);
  dpw::LaurentMatrixLoop a = dpw::LaurentMatrixLoop::identity();
  for (int d = -span; d <= span; ++d) {
    dpw::Matrix2 m;
    m << dpw::Complex(uni(rng), uni(rng)), dpw::Complex(uni(rng), uni(rng)),
        dpw::Complex(uni(rng), uni(rng)), dpw::Complex(uni(rng), uni(rng));
    a.set_coefficient(d, a.coefficient(d) + m);
  }
  return a;
}

dpw::FuchsianPotential test_potential() {
  dpw::SurfaceParams params{3, 2};
  return dpw::build_potential(params, dpw::default_theta(),
                              dpw::lawson_punctures());
}

}  // namespace

static void BM_LoopMul(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const auto a = random_loop(rng, 8, 0.3);
  const auto b = random_loop(rng, 8, 0.3);
  for (auto _ : state)
    benchmark::DoNotOptimize(dpw::loop_mul(a, b, 16));
}
BENCHMARK(BM_LoopMul);

static void BM_IwasawaFactorize(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const auto a = random_loop(rng, 3, 0.08);
  for (auto _ : state)
    benchmark::DoNotOptimize(dpw::iwasawa_factorize(a, 12, 1e-10));
}
BENCHMARK(BM_IwasawaFactorize);

static void BM_Transport(benchmark::State& state) {
  const auto pot = test_potential();
  const auto sys = dpw::pole_system_at(pot, dpw::Complex(0.6, 0.4));
  const auto path = dpw::make_polyline(
      {dpw::Complex(3, 0), dpw::Complex(0.2, 2.5), dpw::Complex(-3, 0.3)},
      {dpw::Complex(1, 0), dpw::Complex(0, 1), dpw::Complex(-1, 0),
       dpw::Complex(0, -1)});
  for (auto _ : state)
    benchmark::DoNotOptimize(dpw::transport(sys, path));
}
BENCHMARK(BM_Transport);

static void BM_Monodromy(benchmark::State& state) {
  const auto pot = test_potential();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        dpw::loop_monodromy(pot, dpw::Complex(0.6, 0.4)));
}
BENCHMARK(BM_Monodromy);

BENCHMARK_MAIN();
