#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "etcsim/engine.hpp"
#include "etcsim/io.hpp"
#include "etcsim/linear_etc.hpp"
#include "etcsim/nonlinear_etc.hpp"

using namespace etcsim;

namespace {

void BM_NonlinearPacketSize(benchmark::State& state) {
  const auto cfg = NonlinearTriggerConfig::with_margin(0.01, 0.01, 0.99, 3.0, 1.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(nonlinear_packet_size(cfg));
}
BENCHMARK(BM_NonlinearPacketSize);

void BM_LinearPacketSize(benchmark::State& state) {
  const auto rs = resolve(find_builtin("paper/linear-gamma5delta").runs.front());
  const auto cfg = std::get<LinearResolved>(rs.scheme).trigger;
  for (auto _ : state) benchmark::DoNotOptimize(linear_packet_size(cfg));
}
BENCHMARK(BM_LinearPacketSize);

void BM_ZQuantizerRoundTrip(benchmark::State& state) {
  const ZQuantizer q(13.2, 15);
  double z = -13.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(q.decode(q.encode(z)));
    z = z > 13.0 ? -13.0 : z + 1e-3;
  }
}
BENCHMARK(BM_ZQuantizerRoundTrip);

void BM_TimingQuantizerRoundTrip(benchmark::State& state) {
  const TimingQuantizer q(0.015, 6, 0.006);
  Tick n = 0;
  for (auto _ : state) {
    const double ts = static_cast<double>(n) * 0.003;
    benchmark::DoNotOptimize(q.decode(q.encode(ts, 1), ts + 0.009));
    ++n;
  }
}
BENCHMARK(BM_TimingQuantizerRoundTrip);

/// One full run of a built-in; the counter reports simulated steps per second.
void BM_Run(benchmark::State& state, const char* name, bool record) {
  const auto rs = resolve(find_builtin(name).runs.front());
  for (auto _ : state) benchmark::DoNotOptimize(run(rs, RunOptions{record}));
  state.counters["steps/s"] =
      benchmark::Counter(static_cast<double>(rs.steps) * static_cast<double>(state.iterations()),
                         benchmark::Counter::kIsRate);
}
BENCHMARK_CAPTURE(BM_Run, linear_gamma5delta, "paper/linear-gamma5delta", true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, linear_gamma5delta_no_trace, "paper/linear-gamma5delta", false)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, nonlinear_fig, "paper/nonlinear-fig", true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, nonlinear_rate, "paper/nonlinear-rate", false)->Unit(benchmark::kMillisecond);

void BM_RateSweep(benchmark::State& state) {
  const Scenario base = find_builtin("paper/nonlinear-rate").runs.front();
  const auto grid = linspace(0.02, 0.99, 20);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(base, grid, seeds, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_RateSweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
