#include "mixboot/dataset.hpp"
#include "mixboot/em.hpp"
#include "mixboot/hclust.hpp"
#include "mixboot/model_selection.hpp"
#include "mixboot/resampling.hpp"

#include <benchmark/benchmark.h>

using namespace mixboot;

namespace {

const DataMatrix& faithful_data() {
  static const DataMatrix d = old_faithful().data;
  return d;
}

const FitResult& faithful_fit() {
  static const FitResult f = em_fit(faithful_data(), ward_initialization(WardDendrogram(faithful_data().values()), 3),
                                    CovarianceFamily::FullEqual);
  return f;
}

void BM_EStep(benchmark::State& state) {
  const auto& fit = faithful_fit();
  for (auto _ : state) benchmark::DoNotOptimize(e_step(faithful_data(), fit.model));
}
BENCHMARK(BM_EStep);

void BM_WardTree(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(WardDendrogram(faithful_data().values()));
}
BENCHMARK(BM_WardTree);

void BM_EmFit(benchmark::State& state) {
  const auto family = kAllFamilies[static_cast<std::size_t>(state.range(0))];
  const auto init = ward_initialization(WardDendrogram(faithful_data().values()), 3);
  for (auto _ : state) benchmark::DoNotOptimize(em_fit(faithful_data(), init, family));
  state.SetLabel(std::string(mclust_name(family)));
}
BENCHMARK(BM_EmFit)->DenseRange(0, 3);

void BM_SelectModel(benchmark::State& state) {
  SelectionConfig cfg;
  cfg.g_max = 5;
  for (auto _ : state) benchmark::DoNotOptimize(select_model(faithful_data(), cfg));
}
BENCHMARK(BM_SelectModel)->Unit(benchmark::kMillisecond);

// 200 replicates (n for the jackknife) on Old Faithful.
void BM_Resampling(benchmark::State& state) {
  const auto method = kAllMethods[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state)
    benchmark::DoNotOptimize(run_resampling(faithful_data(), faithful_fit(), method, kDefaultReplicates, 1));
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_Resampling)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
