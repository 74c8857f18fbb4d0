// Micro-benchmarks for the hot paths: one RK4 step, dictionary evaluation,
// and the full loss/gradient over a realistic pair batch.

#include <benchmark/benchmark.h>

#include <vector>

#include "rksindy/benchmarks.hpp"
#include "rksindy/dictionary.hpp"
#include "rksindy/regression.hpp"
#include "rksindy/rk4.hpp"

namespace {

using namespace rksindy;

void lorenz_rhs(std::span<const double> x, std::span<double> dx) {
  dx[0] = 10.0 * (x[1] - x[0]);
  dx[1] = x[0] * (28.0 - x[2]) - x[1];
  dx[2] = x[0] * x[1] - 8.0 / 3.0 * x[2];
}

void bench_rk4_step(benchmark::State& state) {
  std::vector<double> x = {-8.0, 7.0, 27.0};
  std::vector<double> out(3);
  for (auto _ : state) {
    rk4_step(lorenz_rhs, x, 1e-2, std::span<double>(out));
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bench_rk4_step);

void bench_dictionary_evaluate(benchmark::State& state) {
  const Dictionary dict =
      build_polynomial_dictionary(3, static_cast<int>(state.range(0)));
  std::vector<double> v = {-8.0, 7.0, 27.0};
  std::vector<double> out(dict.size());
  for (auto _ : state) {
    evaluate(dict, v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(std::to_string(dict.size()) + " features");
}
BENCHMARK(bench_dictionary_evaluate)->Arg(2)->Arg(3)->Arg(5);

struct LossFixture {
  ModelForm form;
  std::vector<PredictionPair> pairs;
  LossConfig loss_cfg;
  ParamLayout layout;

  LossFixture() {
    const BenchmarkSpec& spec = get_benchmark("lorenz");
    TrajectorySet data = simulate_benchmark(spec, 1e-2, 5.0, 0.0, 0);
    form = benchmark_form(spec);
    pairs.push_back(build_pairs(data, PairDirection::forward));
    pairs.push_back(build_pairs(data, PairDirection::backward));
    loss_cfg.use_backward = true;
    ridge_warm_start(form, pairs.front());
    layout = ParamLayout::build(form);
  }
};

void bench_loss(benchmark::State& state) {
  static const LossFixture fx;
  for (auto _ : state) {
    const double value = loss(fx.form, fx.pairs, fx.loss_cfg);
    benchmark::DoNotOptimize(value);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(fx.pairs[0].rows() * 2));
}
BENCHMARK(bench_loss);

void bench_gradient(benchmark::State& state) {
  static const LossFixture fx;
  for (auto _ : state) {
    const std::vector<double> g = gradient(fx.form, fx.pairs, fx.loss_cfg, fx.layout);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(fx.pairs[0].rows() * 2));
}
BENCHMARK(bench_gradient);

}  // namespace

BENCHMARK_MAIN();
