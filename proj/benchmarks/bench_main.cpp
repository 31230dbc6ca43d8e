#include <random>

#include <benchmark/benchmark.h>

#include "pointsource/experiment.hpp"

using namespace pointsource;

namespace {

DiscreteMeasure random_measure(int dim, int n, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> loc(0, hi), w(0.1, 1);
  DiscreteMeasure mu;
  for (int i = 0; i < n; ++i) {
    Point x(dim);
    for (int a = 0; a < dim; ++a) x[a] = loc(rng);
    mu.add(w(rng), x);
  }
  return mu;
}

SpreadFamily family(int64_t k) { return k == 0 ? SpreadFamily::cut_gaussian : SpreadFamily::fast; }

void BM_SensorKernelEval(benchmark::State& state) {
  const auto k = make_sensor_kernel(family(state.range(0)) == SpreadFamily::fast
                                        ? SpreadParams::fast(0.16)
                                        : SpreadParams::cut_gaussian(0.05, 0.05, 0.15),
                                    0.004);
  double t = -0.2, acc = 0;
  for (auto _ : state) {
    acc += k->eval(t);
    t = t > 0.2 ? -0.2 : t + 1e-4;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_SensorKernelEval)->Arg(0)->Arg(1);

void BM_ForwardApply(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const ExperimentSpec s = ExperimentSpec::defaults(dim, family(state.range(1)), DataTerm::l2_squared);
  const SensorGridOperator A(s.domain, s.sensors_per_axis, s.sensor_fraction, s.spread);
  const DiscreteMeasure mu = random_measure(dim, 50, s.domain.upper(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(A.apply(mu));
}
BENCHMARK(BM_ForwardApply)->Args({1, 0})->Args({1, 1})->Args({2, 0})->Args({2, 1});

void BM_PreadjointMinimise(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const ExperimentSpec s = ExperimentSpec::defaults(dim, family(state.range(1)), DataTerm::l2_squared);
  const ExperimentData data = generate_data(s);
  const SensorGridOperator A(s.domain, s.sensors_per_axis, s.sensor_fraction, s.spread);
  const std::vector<double> y(data.noisy.data(), data.noisy.data() + data.noisy.size());
  const WeightedKernelSum z = A.preadjoint(y);
  for (auto _ : state) benchmark::DoNotOptimize(minimise(z, s.domain, {.tolerance = 1e-3}));
}
BENCHMARK(BM_PreadjointMinimise)->Args({1, 0})->Args({1, 1})->Args({2, 0})->Args({2, 1})->Unit(benchmark::kMillisecond);

void BM_WeightSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TriangularGaussianKernel1D rho(0.05, 0.15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(0.2, 0.8), eta(-3, 1);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (i + jitter(rng)) * 0.04;
  QuadraticWeightProblem p;
  p.D.resize(n, n);
  p.eta.resize(n);
  for (int i = 0; i < n; ++i) {
    p.eta(i) = eta(rng);
    for (int j = 0; j < n; ++j) p.D(i, j) = rho.eval(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
  }
  p.lambda = 0.3;
  const auto method = state.range(1) == 0 ? InnerMethod::forward_backward : InnerMethod::semismooth_newton;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_weights(p, {.method = method, .tolerance = 1e-10, .max_iterations = 1'000'000}));
}
BENCHMARK(BM_WeightSolve)->ArgsProduct({{10, 40}, {0, 1}});

void BM_SolverIterations(benchmark::State& state) {
  const ExperimentSpec s = ExperimentSpec::defaults(1, SpreadFamily::cut_gaussian, DataTerm::l2_squared);
  const Problem p = make_problem(s, generate_data(s).noisy);
  SolverConfig cfg;
  cfg.max_outer = 100;
  cfg.post_values = false;
  const auto algo = static_cast<Algorithm>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_solver(p, algo, cfg));
  state.SetLabel(algorithm_name(algo));
}
BENCHMARK(BM_SolverIterations)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
