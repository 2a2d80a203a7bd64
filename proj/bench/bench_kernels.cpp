// Serial reference vs OpenMP kernel for each parallel hot path. Both variants
// produce identical results; only wall time differs.

#include <benchmark/benchmark.h>

#include <random>

#include "bnlab/infer.hpp"
#include "bnlab/learn.hpp"
#include "bnlab/sensitivity.hpp"
#include "oracle.hpp"

using namespace bnlab;

namespace {

const BayesianNetwork& network() {
  static const BayesianNetwork net = [] {
    std::mt19937_64 rng(17);
    return oracle::random_network(rng, {14, 4, 3, 0.35});
  }();
  return net;
}

const data::Dataset& sample() {
  static const data::Dataset d = learn::forward_sample(network(), 3000, 5);
  return d;
}

learn::LearnConfig learn_config() {
  learn::LearnConfig cfg;
  cfg.max_non_improving = 30;
  cfg.max_parents = 3;
  return cfg;
}

template <bool Parallel>
void bootstrap(benchmark::State& state) {
  const learn::BootstrapConfig boot{static_cast<std::size_t>(state.range(0)), 0.5};
  for (auto _ : state) {
    auto r = Parallel ? learn::bootstrap_consensus(sample(), boot, learn_config())
                      : learn::bootstrap_consensus_serial(sample(), boot, learn_config());
    benchmark::DoNotOptimize(r.edges.data());
  }
}

template <bool Parallel>
void scan(benchmark::State& state) {
  for (auto _ : state) {
    auto r = Parallel ? infer::evidence_scan(network(), 0) : infer::evidence_scan_serial(network(), 0);
    benchmark::DoNotOptimize(r.rows.data());
  }
}

template <bool Parallel>
void tornado(benchmark::State& state) {
  const sensitivity::Event event{0, 0};
  for (auto _ : state) {
    auto r = Parallel ? sensitivity::tornado(network(), event, {}, 10)
                      : sensitivity::tornado_serial(network(), event, {}, 10);
    benchmark::DoNotOptimize(r.data());
  }
}

}  // namespace

BENCHMARK(bootstrap<false>)->Name("bootstrap/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(bootstrap<true>)->Name("bootstrap/openmp")->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(scan<false>)->Name("evidence_scan/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(scan<true>)->Name("evidence_scan/openmp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(tornado<false>)->Name("tornado/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(tornado<true>)->Name("tornado/openmp")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
