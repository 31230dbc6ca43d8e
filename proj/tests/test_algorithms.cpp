#include <doctest.h>

#include <cmath>

#include "pointsource/algorithms.hpp"
#include "support.hpp"

using namespace pointsource;

namespace {

const SpreadParams kGauss = SpreadParams::cut_gaussian(0.05, 0.05, 0.15);

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// 1D problem with two spikes and uniform noise of the given amplitude.
Problem small_problem(double noise, double alpha, DataTerm term = DataTerm::l2_squared, std::uint64_t seed = 1) {
  const SensorGridOperator A(Cube::unit(1), 50, 0.4, kGauss);
  DiscreteMeasure truth;
  truth.add(0.3, Point{0.3});
  truth.add(0.6, Point{0.7});
  Eigen::VectorXd b = to_eigen(A.apply(truth));
  testing::Rng rng(seed);
  for (auto& v : b) v += rng.uniform(-noise, noise);
  return Problem::make(Cube::unit(1), 50, 0.4, kGauss, b, alpha, term);
}

Problem zero_problem(int dim) {
  const Cube dom = dim == 1 ? Cube::unit(1) : Cube::unit(2, 2.0);
  const int n = dim == 1 ? 30 : 8;
  const auto count = static_cast<Eigen::Index>(dim == 1 ? n : n * n);
  return Problem::make(dom, n, 0.4, SpreadParams::fast(0.16), Eigen::VectorXd::Zero(count), 0.1,
                       DataTerm::l2_squared);
}

SolverConfig short_config(int iters) {
  SolverConfig cfg;
  cfg.max_outer = iters;
  return cfg;
}

}  // namespace

TEST_CASE("inertial parameters") {
  const double l1 = next_inertia(1.0);
  CHECK(l1 == doctest::Approx(2 / (1 + std::sqrt(5.0))).epsilon(1e-15));
  CHECK(l1 == doctest::Approx(0.618034).epsilon(1e-6));
  CHECK(l1 * (1 / 1.0 - 1) == 0.0);

  double lambda = 1;
  double prev = 0;
  for (int k = 1; k <= 1000; ++k) {
    prev = lambda;
    lambda = next_inertia(lambda);
    CHECK(1 / lambda >= 1 + k / 2.0);
    CHECK(lambda > 0);
    CHECK(lambda <= 1);
    const double lhs = (1 - lambda) / (lambda * lambda), rhs = 1 / (prev * prev);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
  }
}

TEST_CASE("tolerance schedule and sample points") {
  const ToleranceSchedule s;
  CHECK(s(0) == 0.5);
  CHECK(s(5) == doctest::Approx(0.5 / std::pow(2.0, 1.4)));
  for (int k = 0; k < 100; ++k) CHECK(s(k + 1) < s(k));

  for (int k = 0; k <= 10; ++k) CHECK(is_sample_point(k));
  CHECK_FALSE(is_sample_point(-1));
  CHECK_FALSE(is_sample_point(15));
  CHECK(is_sample_point(20));
  CHECK(is_sample_point(100));
  CHECK_FALSE(is_sample_point(150));
  CHECK(is_sample_point(200));
  CHECK(is_sample_point(2000));
  CHECK_FALSE(is_sample_point(2100));
  CHECK(is_sample_point(3000));
  int count = 0;
  for (int k = 0; k <= 2000; ++k) count += is_sample_point(k);
  CHECK(count == 11 + 9 + 19);
}

TEST_CASE("objective values") {
  const Problem p = small_problem(0.05, 0.1);
  CHECK(evaluate_objective(p, DiscreteMeasure{}) == doctest::Approx(0.5 * p.b.squaredNorm()));
  testing::Rng rng(301);
  for (int i = 0; i < 10; ++i) {
    const DiscreteMeasure mu = testing::random_measure(rng, 1, 5, 0, 1, 0, 1);
    const DiscreteMeasure twice = mu.combined(2, DiscreteMeasure{}, 0);
    const Eigen::VectorXd Amu = to_eigen(p.A->apply(mu));
    CHECK(evaluate_objective(p, twice) ==
          doctest::Approx(0.5 * (2 * Amu - p.b).squaredNorm() + 2 * p.alpha * radon_norm(mu)).epsilon(1e-13));
  }
  Problem l1 = small_problem(0.05, 0.1, DataTerm::l1);
  CHECK(evaluate_objective(l1, DiscreteMeasure{}) == doctest::Approx(l1.b.lpNorm<1>()));

  // Exact data and no regularisation: the truth has zero objective.
  DiscreteMeasure truth;
  truth.add(0.8, Point{0.45});
  Problem exact = small_problem(0, 0.1);
  exact.b = to_eigen(exact.A->apply(truth));
  exact.alpha = 0;
  CHECK(evaluate_objective(exact, truth) == 0.0);
}

TEST_CASE("zero data keeps every solver at zero") {
  for (int dim = 1; dim <= 2; ++dim) {
    const Problem p = zero_problem(dim);
    const SolverConfig cfg = short_config(15);
    for (const SolverResult& r : {run_mu_fb(p, cfg), run_mu_fista(p, cfg), run_mu_pdps(p, cfg),
                                  run_fw(p, cfg, FwVariant::relaxed), run_fw(p, cfg, FwVariant::fully_corrective)}) {
      CHECK(r.mu.empty());
      CHECK(r.record.values.size() == 16);
      for (double v : r.record.values) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("insertion returns zero when the lower bound already holds") {
  const ParticleToWaveOperator D(ProductKernel::uniform(make_wave_kernel(kGauss), 1));
  WeightedKernelSum eta(1);
  eta.add_constant(-0.05);
  InsertionSettings s;
  s.epsilon = 1e-3;
  const InsertionResult r = insert_and_adjust(DiscreteMeasure{}, eta, 0.1, D, Cube::unit(1), s);
  CHECK(r.mu.empty());
  CHECK(r.insertions == 0);
  CHECK_FALSE(r.capped);
}

TEST_CASE("insertion recovers a single kernel bump") {
  for (int dim = 1; dim <= 2; ++dim) {
    const auto rho = ProductKernel::uniform(make_wave_kernel(kGauss), dim);
    const ParticleToWaveOperator D(rho);
    // In 2D a dyadic centre is hit exactly; an off-grid one leaves two
    // nearly cancelling kinked bumps whose resolution along the kink lines
    // takes millions of cubes.
    const Point x0 = Point::filled(dim, dim == 1 ? 0.4123 : 0.375);
    const double lambda = 0.1;
    WeightedKernelSum eta(dim);
    eta.add(-1.0, x0, rho);
    eta.add_constant(-lambda);
    InsertionSettings s;
    s.epsilon = 1e-4;
    const InsertionResult r = insert_and_adjust(DiscreteMeasure{}, eta, lambda, D, Cube::unit(dim), s);
    REQUIRE(r.insertions >= 1);
    const DiscreteMeasure mu = prune(r.mu);
    // The first point carries the weight of the scalar problem at that point.
    const double rho0 = rho->eval(Point::filled(dim, 0.0));
    double mass = 0;
    for (const auto& sp : mu.spikes()) {
      CHECK((sp.location - x0).norm_inf() < 0.01);
      mass += sp.weight;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-2));
    if (r.insertions == 1) {
      REQUIRE(mu.size() == 1);
      const double closed = rho->eval(mu[0].location - x0) / rho0;
      CHECK(std::abs(mu[0].weight - closed) <= s.kappa * s.epsilon / rho0);
    }
    const Certification c = certify_step(r.mu, eta, lambda, D, Cube::unit(dim), s.epsilon, {});
    CHECK(c.passed);
  }
}

TEST_CASE("insertion output passes an independent sweep") {
  testing::Rng rng(307);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = trial % 2 + 1;
    const Cube dom = dim == 1 ? Cube::unit(1) : Cube::unit(2, 2.0);
    // The 2D cut-Gaussian sensors have jump edges that take many insertions to cover.
    const SpreadParams sp = dim == 1 ? kGauss : SpreadParams::fast(0.3);
    const SensorGridOperator A(dom, dim == 1 ? 40 : 10, 0.4, sp);
    const ParticleToWaveOperator D(ProductKernel::uniform(make_wave_kernel(sp), dim));
    // Mostly mild readings with a few strongly negative sensors.
    std::vector<double> y(A.num_sensors());
    for (auto& v : y) v = rng.uniform(-0.05, 0.3);
    for (int k = 0; k < 3; ++k) y[static_cast<std::size_t>(rng.integer(0, static_cast<int>(y.size()) - 1))] = rng.uniform(-2, -1);
    const WeightedKernelSum eta = A.preadjoint(y);
    const DiscreteMeasure base = testing::random_measure(rng, dim, 3, 0, dom.upper(0), 0, 0.5);
    WeightedKernelSum shifted = eta;
    shifted.add_sum(D.apply(base, -1.0));
    InsertionSettings s;
    s.epsilon = rng.uniform(1e-3, 1e-2);
    const double lambda = rng.uniform(0.001, 0.05);
    const InsertionResult r = insert_and_adjust(base, shifted, lambda, D, dom, s);
    CHECK(r.inner_converged);
    for (const auto& spike : r.mu.spikes()) CHECK(spike.weight >= 0);
    const Certification c = certify_step(r.mu, shifted, lambda, D, dom, s.epsilon, {});
    CHECK(c.passed);
    CHECK(c.min_value >= -1.1 * s.epsilon);
    CHECK(c.max_on_support <= 1.1 * s.epsilon);

    // The single-insertion cap stops after one point and says so.
    InsertionSettings one = s;
    one.single_insertion = true;
    const InsertionResult capped = insert_and_adjust(base, shifted, lambda, D, dom, one);
    CHECK(capped.insertions <= 1);
    if (capped.insertions == 1) CHECK(capped.capped);
  }
}

TEST_CASE("insertion rejects bad settings") {
  const ParticleToWaveOperator D(ProductKernel::uniform(make_wave_kernel(kGauss), 1));
  InsertionSettings s;
  CHECK_THROWS_AS(insert_and_adjust({}, WeightedKernelSum(1), 0.1, D, Cube::unit(1), s), std::invalid_argument);
  s.epsilon = 1e-3;
  s.kappa = 1.5;
  CHECK_THROWS_AS(insert_and_adjust({}, WeightedKernelSum(1), 0.1, D, Cube::unit(1), s), std::invalid_argument);
}

TEST_CASE("proximal solvers decrease the objective and certify their steps") {
  const Problem p = small_problem(0.05, 0.02);
  SolverConfig cfg = short_config(60);
  cfg.certify = true;
  const double zero = evaluate_objective(p, {});
  for (const auto& r : {run_mu_fb(p, cfg), run_mu_fista(p, cfg), run_mu_pdps(p, cfg)}) {
    CHECK(r.record.values.back() < zero);
    CHECK(r.record.values.back() <= r.record.values[1]);
    CHECK(r.record.inner_converged);
    CHECK(r.record.certifications.size() == r.record.rows.size() - 1);
    for (const auto& c : r.record.certifications)
      if (!c.capped) CHECK(c.passed);
    for (const auto& sp : r.mu.spikes()) CHECK(sp.weight > 0);
    CHECK(r.mu.size() <= 10);
  }
}

TEST_CASE("forward-backward in tightened mode is nearly monotone") {
  const Problem p = small_problem(0.05, 0.02);
  SolverConfig cfg = short_config(100);
  cfg.tightened = true;
  cfg.merge_final = false;
  const SolverResult r = run_mu_fb(p, cfg);
  const auto& v = r.record.values;
  for (int j = 1; j + 1 < static_cast<int>(v.size()); ++j)
    CHECK(v[static_cast<std::size_t>(j) + 1] <= v[static_cast<std::size_t>(j)] + cfg.kappa * cfg.schedule(j + 1) / j);
}

TEST_CASE("accelerated primal-dual keeps the step product") {
  const Problem p = small_problem(0.05, 0.02);
  const SolverResult r = run_mu_pdps(p, short_config(200));
  REQUIRE(r.record.taus.size() == 200);
  const double product = r.record.taus[0] * r.record.sigmas[0];
  CHECK(product * p.L < 1);
  CHECK(r.record.taus[0] == doctest::Approx(0.5 / std::sqrt(p.L)));
  CHECK(r.record.sigmas[0] == doctest::Approx(1.98 / std::sqrt(p.L)));
  for (std::size_t k = 0; k < r.record.taus.size(); ++k)
    CHECK(std::abs(r.record.taus[k] * r.record.sigmas[k] - product) <= 1e-14 * product);
  CHECK(r.record.sigmas.back() < r.record.sigmas.front());

  SolverConfig plain = short_config(20);
  plain.acceleration = Acceleration::none;
  const SolverResult q = run_mu_pdps(p, plain);
  for (std::size_t k = 0; k < q.record.taus.size(); ++k) {
    CHECK(q.record.taus[k] == q.record.taus[0]);
    CHECK(q.record.sigmas[k] == q.record.sigmas[0]);
  }

  Problem l1 = small_problem(0.05, 0.02, DataTerm::l1);
  SolverConfig accel = short_config(2);
  accel.acceleration = Acceleration::strongly_convex_dual;
  CHECK_THROWS_AS(run_mu_pdps(l1, accel), std::invalid_argument);
  CHECK_THROWS_AS(run_mu_fb(l1, short_config(2)), std::invalid_argument);
  CHECK_THROWS_AS(run_fw(l1, short_config(2), FwVariant::relaxed), std::invalid_argument);
}

TEST_CASE("primal-dual Lagrangian gap against its own limit is non-negative") {
  const Problem p = small_problem(0.05, 0.02);
  SolverConfig cfg = short_config(300);
  cfg.acceleration = Acceleration::none;
  cfg.merge_final = false;
  const SolverResult ref = run_mu_pdps(p, cfg);
  for (int n : {5, 20, 80}) {
    const SolverResult r = run_mu_pdps(p, short_config(n));
    CHECK(lagrangian_gap(p, r.mu, r.y, ref.mu, ref.y) >= -1e-3);
  }
}

TEST_CASE("conditional gradient recovers a noiseless spike") {
  const SensorGridOperator A(Cube::unit(1), 50, 0.4, kGauss);
  const Point x0{0.537};
  DiscreteMeasure truth;
  truth.add(1.0, x0);
  const Problem p = Problem::make(Cube::unit(1), 50, 0.4, kGauss, to_eigen(A.apply(truth)), 1e-3,
                                  DataTerm::l2_squared);

  // Grid maximiser of A_* b.
  const WeightedKernelSum atb = A.preadjoint(std::vector<double>(p.b.data(), p.b.data() + p.b.size()));
  double best = -1, arg = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0, v = atb.eval(Point{x});
    if (v > best) best = v, arg = x;
  }
  CHECK(std::abs(arg - x0[0]) < A.spacing(0));

  for (auto variant : {FwVariant::relaxed, FwVariant::fully_corrective}) {
    const SolverResult r = run_fw(p, short_config(30), variant);
    REQUIRE_FALSE(r.mu.empty());
    std::size_t heaviest = 0;
    for (std::size_t i = 0; i < r.mu.size(); ++i)
      if (r.mu[i].weight > r.mu[heaviest].weight) heaviest = i;
    CHECK(std::abs(r.mu[heaviest].location[0] - x0[0]) < A.spacing(0));
    CHECK(std::abs(r.mu[heaviest].location[0] - arg) < A.spacing(0));
  }
}

TEST_CASE("weight postprocessing never increases the objective") {
  const Problem p = small_problem(0.05, 0.02);
  CHECK(postprocess_weight_opt(p, DiscreteMeasure{}).empty());
  testing::Rng rng(311);
  for (int i = 0; i < 20; ++i) {
    const DiscreteMeasure mu = testing::random_measure(rng, 1, 6, 0, 1, 0, 1);
    const DiscreteMeasure post = postprocess_weight_opt(p, mu);
    CHECK(evaluate_objective(p, post) <= evaluate_objective(p, mu));
    const DiscreteMeasure again = postprocess_weight_opt(p, post, 1e-12, 100000);
    CHECK(evaluate_objective(p, again) <= evaluate_objective(p, post));
    CHECK(evaluate_objective(p, post) - evaluate_objective(p, again) <= 1e-6);
  }
}

TEST_CASE("guarded merging never increases the data term") {
  const Problem p = small_problem(0.05, 0.02);
  testing::Rng rng(313);
  for (int i = 0; i < 30; ++i) {
    const DiscreteMeasure mu = testing::random_measure(rng, 1, 12, 0.2, 0.35, 0, 0.3);
    const MergeResult r = merge_with_data_guard(p, mu, 0.02);
    CHECK(data_term_value(p, r.measure) <= data_term_value(p, mu));
  }
}
