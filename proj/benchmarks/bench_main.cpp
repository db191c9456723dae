#include <benchmark/benchmark.h>

#include <cmath>

#include "nsc/aipw.hpp"
#include "nsc/discrete_law.hpp"
#include "nsc/experiment.hpp"
#include "nsc/oracle.hpp"
#include "nsc/solvers.hpp"

namespace {

void BM_LogisticFit(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    x(r, 1) = std::sin(0.37 * static_cast<double>(r));
    x(r, 2) = std::cos(0.11 * static_cast<double>(r));
    y[r] = (r * 7919) % 13 < 6 ? 1.0 : 0.0;
  }
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(nsc::fit_logistic(x, y, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogisticFit)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_EstimateAipw(benchmark::State& state) {
  const auto s = static_cast<nsc::Setting>(state.range(0));
  const auto data = nsc::simulate_setting(s, static_cast<std::size_t>(state.range(1)), 1).masked;
  auto config = nsc::setting_config(s, nsc::Misspec::none);
  config.compute_se = state.range(2) != 0;
  const auto b = nsc::setting_functional(s);
  for (auto _ : state) benchmark::DoNotOptimize(nsc::estimate_aipw(data, b, config));
  state.SetLabel(nsc::to_string(s) + (config.compute_se ? "+se" : ""));
}
BENCHMARK(BM_EstimateAipw)
    ->Args({0, 5000, 0})
    ->Args({0, 5000, 1})
    ->Args({1, 5000, 0})
    ->Args({2, 5000, 0})
    ->Args({1, 50000, 0})
    ->Unit(benchmark::kMillisecond);

void BM_Bootstrap(benchmark::State& state) {
  const auto data = nsc::simulate_setting(nsc::Setting::binary1, 2000, 2).masked;
  auto config = nsc::setting_config(nsc::Setting::binary1, nsc::Misspec::none);
  config.compute_se = false;
  const auto b = nsc::setting_functional(nsc::Setting::binary1);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nsc::bootstrap_ci(data, b, config, 100, 3, 0.05,
                                                                   nsc::EstimatorKind::aipw, threads));
}
BENCHMARK(BM_Bootstrap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BuildLaw(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nsc::build_discrete_law(nsc::random_nsc_components(3, p, 5)));
  }
}
BENCHMARK(BM_BuildLaw)->Arg(0)->Arg(2)->Arg(6);

void BM_OracleSuite(benchmark::State& state) {
  nsc::OracleSuiteOptions opt;
  opt.nsc_laws = static_cast<int>(state.range(0));
  opt.self_censoring_laws = 1;
  for (auto _ : state) benchmark::DoNotOptimize(nsc::run_oracle_suite(opt));
}
BENCHMARK(BM_OracleSuite)->Arg(2)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
