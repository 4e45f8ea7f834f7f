// Parallel kernels against their serial references on synthetic corpora.
//   courl_bench --benchmark_filter=Projection

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "courl/centrality.hpp"
#include "courl/graph.hpp"
#include "courl/pipeline.hpp"
#include "courl/synth.hpp"

using namespace courl;

namespace {

// Matrix and full network for a default-shaped corpus of `users` users.
const DetectionResult& corpus(std::size_t users) {
  static std::map<std::size_t, DetectionResult> cache;
  auto it = cache.find(users);
  if (it == cache.end()) {
    SynthConfig c;
    c.n_organic = users - c.n_coordinated;
    c.url_catalog_size = 5 * users;
    it = cache.emplace(users, run_detection(generate(c).posts, DetectionParams{})).first;
  }
  return it->second;
}

void set_threads(benchmark::State& state) { omp_set_num_threads(static_cast<int>(state.range(1))); }

void BM_ProjectionPruned(benchmark::State& state) {
  const auto& m = corpus(static_cast<std::size_t>(state.range(0))).matrix;
  set_threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(project_similarity(m, 0.5));
  state.counters["nnz"] = static_cast<double>(m.nnz());
}

void BM_ProjectionSerial(benchmark::State& state) {
  const auto& m = corpus(static_cast<std::size_t>(state.range(0))).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(project_similarity_serial(m, 0.5));
  state.counters["nnz"] = static_cast<double>(m.nnz());
}

void BM_SpmvParallel(benchmark::State& state) {
  const auto adj = to_adjacency(corpus(static_cast<std::size_t>(state.range(0))).full_network);
  std::vector<double> x(adj.n_nodes(), 1.0), y(adj.n_nodes());
  set_threads(state);
  for (auto _ : state) {
    shifted_spmv(adj, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_SpmvSerial(benchmark::State& state) {
  const auto adj = to_adjacency(corpus(static_cast<std::size_t>(state.range(0))).full_network);
  std::vector<double> x(adj.n_nodes(), 1.0), y(adj.n_nodes());
  for (auto _ : state) {
    shifted_spmv_serial(adj, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void threads_grid(benchmark::internal::Benchmark* b) {
  for (long users : {2000L, 10000L})
    for (long t : {1L, 2L, 4L}) b->Args({users, t});
}

}  // namespace

BENCHMARK(BM_ProjectionPruned)->Apply(threads_grid)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectionSerial)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpmvParallel)->Apply(threads_grid)->UseRealTime()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SpmvSerial)->Arg(2000)->Arg(10000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
