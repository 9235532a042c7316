#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "nrc/loop_analysis.hpp"
#include "nrc/nrc_design.hpp"
#include "nrc/plant.hpp"
#include "nrc/time_sim.hpp"
#include "nrc/tracking.hpp"

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

nrc::PlantSpec surrogate() {
  nrc::PlantSpec p;
  p.gain = 0.40284615384615385;
  p.modes = {{kTwoPi * 739.0, 0.01, 1.0}, {kTwoPi * 983.0, 0.01, 0.3}};
  p.delay_s = 150e-6;
  return p;
}

nrc::TrackerSpec tracker() {
  nrc::TrackerSpec t;
  t.pi = {0.99, kTwoPi * 5.0};
  t.notches = {{kTwoPi * 1000.0, 1.1, 1.0}, {kTwoPi * 2600.0, 12.0, 10.0}};
  t.lowpass_corner_rad_s = kTwoPi * 5000.0;
  return t;
}

void BM_PolyRoots(benchmark::State& state) {
  const auto plant = surrogate().without_delay();
  const auto cl = nrc::tf_feedback(nrc::build_plant(plant), nrc::synthesize_nrc(plant, {0.999, 8.0, std::nullopt}));
  for (auto _ : state) benchmark::DoNotOptimize(nrc::poly_roots(cl.den));
}
BENCHMARK(BM_PolyRoots);

void BM_FreqResponse(benchmark::State& state) {
  const auto g = nrc::build_plant(surrogate());
  const auto grid = nrc::log_grid(kTwoPi * 1.0, kTwoPi * 15000.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nrc::freq_response(g, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_FreqResponse)->Arg(100)->Arg(400);

void BM_DualSensitivities(benchmark::State& state) {
  const auto spec = surrogate();
  const auto g = nrc::build_plant(spec);
  const auto cd = nrc::synthesize_nrc(spec, {0.999, 8.0, std::nullopt});
  const auto ct = nrc::build_tracker(tracker());
  const auto grid = nrc::log_grid(kTwoPi * 1.0, kTwoPi * 15000.0, 400);
  for (auto _ : state) benchmark::DoNotOptimize(nrc::dual_sensitivities(g, ct, cd, grid));
}
BENCHMARK(BM_DualSensitivities);

void BM_SimulateDualLoop(benchmark::State& state) {
  const double ts = 30e-6;
  const auto spec = surrogate();
  const auto plant = nrc::discretize_plant(spec, ts);
  const auto ct = nrc::discretize_tracker(tracker(), ts);
  const auto cd = nrc::discretize(nrc::synthesize_nrc(spec, {0.999, 8.0, std::nullopt}), ts);
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto r = nrc::sine_signal(len, ts, 1.0, 100.0);
  const std::vector<double> zero(len, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(nrc::simulate_dual_loop(plant, ct, cd, r, zero, zero));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateDualLoop)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_ChirpIdentify(benchmark::State& state) {
  const double ts = 30e-6;
  const auto plant = nrc::discretize_plant(surrogate(), ts);
  const auto u = nrc::log_chirp({10.0, 5000.0, 2.0, 0.1, 0.05}, 1.0 / ts);
  const auto y = nrc::simulate_open_loop(plant, u);
  for (auto _ : state) benchmark::DoNotOptimize(nrc::chirp_identify(u, y, 1.0 / ts, 8192));
}
BENCHMARK(BM_ChirpIdentify)->Unit(benchmark::kMillisecond);

void BM_RootLocus(benchmark::State& state) {
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back(0.05 + i * 0.01);
  const auto plant = nrc::single_mode_plant(1.0, kTwoPi * 739.0, 0.01);
  const double gamma = state.range(0) == 0 ? 1.0 : 0.999;
  for (auto _ : state) benchmark::DoNotOptimize(nrc::root_locus_n(plant, gamma, grid));
}
BENCHMARK(BM_RootLocus)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
