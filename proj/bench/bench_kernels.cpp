// Serial reference vs OpenMP kernel, same inputs.
#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "sparsetw/edge_stats.hpp"
#include "sparsetw/flow.hpp"
#include "sparsetw/spectral.hpp"

using namespace sparsetw;

namespace {

McConfig mc_config(int workers) {
  McConfig c;
  c.kind = EnsembleKind::CenteredEr;
  c.n = 200;
  c.p = 0.05;
  c.samples = 32;
  c.master_seed = 7;
  c.workers = workers;
  return c;
}

LawParams er_law(int n, double p) { return LawParams::make(exact_s_k(p, 4), std::sqrt(n * p)); }

void BM_McExtremeSerial(benchmark::State& state) {
  const auto c = mc_config(1);
  const auto law = er_law(c.n, *c.p);
  for (auto _ : state) benchmark::DoNotOptimize(mc_extreme_serial(c, law));
}

void BM_McExtremeParallel(benchmark::State& state) {
  const auto c = mc_config(static_cast<int>(state.range(0)));
  const auto law = er_law(c.n, *c.p);
  for (auto _ : state) benchmark::DoNotOptimize(mc_extreme(c, law));
}

struct ScanInput {
  SpectralSample spec;
  LawParams law;
  std::vector<GridPoint> grid;
};

// s4 = 1 and q = 25 put c4 exactly at the strict-mode limit.
constexpr int kScanN = 700;
constexpr double kScanQ = 25.0;

MatrixSample scan_matrix(std::uint64_t seed) {
  return sample_sparse_generic(SparsityProfile::from_q(kScanN, kScanQ, 0.0, 1.0), RngStream{seed, 0});
}

ScanInput scan_input() {
  return {eigen(scan_matrix(3)), LawParams::make(1.0, kScanQ), default_scan_grid(kScanN)};
}

void BM_LocalLawScanSerial(benchmark::State& state) {
  const auto in = scan_input();
  for (auto _ : state) benchmark::DoNotOptimize(local_law_scan_serial(in.spec, in.law, in.grid));
}

void BM_LocalLawScanParallel(benchmark::State& state) {
  const auto in = scan_input();
  for (auto _ : state) benchmark::DoNotOptimize(local_law_scan(in.spec, in.law, in.grid));
}

void BM_FlowCheck(benchmark::State& state, bool parallel) {
  const int n = kScanN;
  const auto h0 = scan_matrix(5);
  const auto w = sample_goe_zero_diag(n, RngStream{5, 1});
  const auto law = LawParams::make(1.0, kScanQ);
  const std::vector<double> ts{0.0, 0.1, 0.5, 1.0, 2.0, 4.0};
  const auto grid = default_scan_grid(n);
  for (auto _ : state) {
    if (parallel)
      benchmark::DoNotOptimize(flow_local_law_check(h0, w, ts, law, grid));
    else
      benchmark::DoNotOptimize(flow_local_law_check_serial(h0, w, ts, law, grid));
  }
}

}  // namespace

BENCHMARK(BM_McExtremeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McExtremeParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalLawScanSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalLawScanParallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FlowCheck, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FlowCheck, parallel, true)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
