#include "pointsource/algorithms.hpp"

#include <cmath>
#include <ctime>
#include <functional>
#include <stdexcept>

namespace pointsource {

double ToleranceSchedule::operator()(int k) const { return c / std::pow(1 + theta * k, p); }

bool is_sample_point(int k) {
  if (k <= 10) return k >= 0;
  if (k <= 100) return k % 10 == 0;
  if (k <= 2000) return k % 100 == 0;
  return k % 1000 == 0;
}

Problem Problem::make(const Cube& domain, int sensors_per_axis, double sensor_fraction, const SpreadParams& spread,
                      Eigen::VectorXd b, double alpha, DataTerm data_term) {
  Problem p;
  p.A = std::make_shared<const SensorGridOperator>(domain, sensors_per_axis, sensor_fraction, spread);
  p.D = std::make_shared<const ParticleToWaveOperator>(ProductKernel::uniform(make_wave_kernel(spread), domain.dim()));
  if (static_cast<std::size_t>(b.size()) != p.A->num_sensors())
    throw std::invalid_argument("Problem: data size does not match the sensor count");
  p.b = std::move(b);
  p.alpha = alpha;
  p.data_term = data_term;
  p.L = estimate_smoothness(spread, p.A->sensor_half_width(), domain.dim()).L;
  return p;
}

namespace {

Eigen::VectorXd forward(const Problem& p, const DiscreteMeasure& mu) {
  const std::vector<double> v = p.A->apply(mu);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

WeightedKernelSum preadjoint(const Problem& p, const Eigen::VectorXd& y) {
  return p.A->preadjoint(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

double data_value(const Problem& p, const Eigen::VectorXd& Amu) {
  const Eigen::VectorXd r = Amu - p.b;
  return p.data_term == DataTerm::l2_squared ? 0.5 * r.squaredNorm() : r.lpNorm<1>();
}

void require_l2(const Problem& p, const char* what) {
  if (p.data_term != DataTerm::l2_squared)
    throw std::invalid_argument(std::string(what) + " requires the squared data term");
}

std::vector<Point> support_points(const DiscreteMeasure& mu) { return mu.locations(); }

Eigen::VectorXd weight_vector(const DiscreteMeasure& mu) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(mu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) w[static_cast<Eigen::Index>(i)] = mu[i].weight;
  return w;
}

/// Accumulates per-iteration statistics and writes sampled rows.
class RunLogger {
 public:
  RunLogger(const Problem& p, const SolverConfig& cfg, RunRecord& rec) : p_(p), cfg_(cfg), rec_(rec) {}

  void initial(const DiscreteMeasure& mu) {
    rec_.values.push_back(evaluate_objective(p_, mu));
    write_row(0, mu, rec_.values.back(), 0, 0);
  }

  void begin_step() { start_ = std::clock(); }

  void end_step(int iter, const DiscreteMeasure& mu, int inner, int merges,
                const std::function<Certification()>& certify = {}) {
    cpu_ += static_cast<double>(std::clock() - start_) / CLOCKS_PER_SEC;
    const double value = evaluate_objective(p_, mu);
    rec_.values.push_back(value);
    inner_sum_ += inner;
    ++inner_count_;
    merges_ += merges;
    if (!is_sample_point(iter)) return;
    write_row(iter, mu, value, inner_count_ ? static_cast<double>(inner_sum_) / inner_count_ : 0.0, merges_);
    inner_sum_ = 0;
    inner_count_ = 0;
    merges_ = 0;
    if (cfg_.certify && certify) rec_.certifications.push_back(certify());
  }

 private:
  void write_row(int iter, const DiscreteMeasure& mu, double value, double inner, int merges) {
    RecordRow row;
    row.iter = iter;
    row.cpu_time_s = cpu_;
    row.value = value;
    if (cfg_.post_values && p_.data_term == DataTerm::l2_squared)
      row.post_value = evaluate_objective(p_, postprocess_weight_opt(p_, mu));
    row.spike_count = mu.support_size();
    row.inner_iters = inner;
    row.merges = merges;
    rec_.rows.push_back(row);
  }

  const Problem& p_;
  const SolverConfig& cfg_;
  RunRecord& rec_;
  std::clock_t start_ = 0;
  double cpu_ = 0;
  long inner_sum_ = 0;
  int inner_count_ = 0;
  int merges_ = 0;
};

InsertionSettings insertion_settings(const SolverConfig& cfg, int k) {
  InsertionSettings s;
  s.epsilon = cfg.schedule(k + 1);
  s.kappa = cfg.kappa;
  s.single_insertion = k < cfg.bootstrap_insertions;
  if (cfg.tightened) s.tighten = static_cast<double>(k);
  s.inner = cfg.inner;
  s.bnb = cfg.bnb;
  s.max_points = cfg.max_spikes;
  return s;
}

/// eta = tau v - D base for a proximal step about `base`.
WeightedKernelSum proximal_eta(const Problem& p, const Eigen::VectorXd& dual, double tau, const DiscreteMeasure& base) {
  WeightedKernelSum eta = preadjoint(p, tau * dual);
  eta.add_sum(p.D->apply(base, -1.0));
  return eta;
}

void finish_proximal(const Problem& p, const SolverConfig& cfg, SolverResult& out) {
  out.mu = prune(out.mu);
  if (cfg.merge_final) out.mu = prune(merge_with_data_guard(p, out.mu, cfg.merge_radius).measure);
}

void check_config(const Problem& p, const SolverConfig& cfg) {
  if (!(p.alpha > 0)) throw std::invalid_argument("solver: alpha must be positive");
  if (!(cfg.kappa > 0 && cfg.kappa < 1)) throw std::invalid_argument("solver: kappa must lie in (0, 1)");
  if (cfg.max_outer < 0) throw std::invalid_argument("solver: negative iteration count");
  if (!(p.L > 0)) throw std::invalid_argument("solver: smoothness constant must be positive");
}

}  // namespace

double data_term_value(const Problem& p, const DiscreteMeasure& mu) { return data_value(p, forward(p, mu)); }

double evaluate_objective(const Problem& p, const DiscreteMeasure& mu) {
  return data_term_value(p, mu) + p.alpha * radon_norm(mu);
}

WeightedKernelSum data_gradient(const Problem& p, const DiscreteMeasure& mu) {
  require_l2(p, "data_gradient");
  return preadjoint(p, forward(p, mu) - p.b);
}

double next_inertia(double lambda) { return 2 * lambda / (lambda + std::sqrt(4 + lambda * lambda)); }

// ---------------------------------------------------------------------------
// Point insertion and weight adjustment

InsertionResult insert_and_adjust(const DiscreteMeasure& base, const WeightedKernelSum& eta, double lambda,
                                  const ParticleToWaveOperator& D, const Cube& domain, const InsertionSettings& s) {
  if (!(s.epsilon > 0)) throw std::invalid_argument("insert_and_adjust: epsilon must be positive");
  if (!(s.kappa > 0 && s.kappa < 1)) throw std::invalid_argument("insert_and_adjust: kappa must lie in (0, 1)");

  std::vector<Point> points;
  std::vector<double> warm, eta_at;
  double base_norm = 0;
  for (const auto& sp : base.spikes()) {
    points.push_back(sp.location);
    warm.push_back(std::max(0.0, sp.weight));
    eta_at.push_back(eta.eval(sp.location));
    base_norm += std::abs(sp.weight);
  }
  Eigen::MatrixXd gram = D.gram(points);
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(warm.data(), static_cast<Eigen::Index>(warm.size()));

  const double tight = s.tighten.value_or(0.0);
  const AccuracyRule rule = [&](const Eigen::VectorXd& b) {
    const double n = b.lpNorm<1>();
    return s.tighten ? s.kappa * s.epsilon / (1 + tight * (n + base_norm)) : s.kappa * s.epsilon / (1 + n);
  };
  BnbOptions bnb = s.bnb;
  bnb.tolerance = s.epsilon;
  bnb.threshold = -s.epsilon;

  InsertionResult out;
  while (true) {
    const QuadraticWeightProblem q{
        gram, Eigen::Map<const Eigen::VectorXd>(eta_at.data(), static_cast<Eigen::Index>(eta_at.size())), lambda};
    const WeightSolution sol = solve_weights(q, s.inner, rule, beta);
    out.inner_iterations += sol.iterations;
    out.inner_converged = out.inner_converged && sol.converged;
    beta = sol.beta;

    if ((s.single_insertion && out.insertions >= 1) || points.size() >= s.max_points) {
      out.capped = true;
      break;
    }

    WeightedKernelSum zeta = eta;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (beta[static_cast<Eigen::Index>(i)] != 0) zeta.add(beta[static_cast<Eigen::Index>(i)], points[i], D.kernel());
    zeta.add_constant(lambda);
    const BnbResult r = minimise(zeta, domain, bnb);
    if (r.value >= -s.epsilon) break;
    bool duplicate = false;
    for (const auto& x : points) duplicate = duplicate || x == r.point;
    if (duplicate) break;

    const auto n = static_cast<Eigen::Index>(points.size());
    points.push_back(r.point);
    eta_at.push_back(eta.eval(r.point));
    Eigen::MatrixXd grown(n + 1, n + 1);
    grown.topLeftCorner(n, n) = gram;
    for (Eigen::Index i = 0; i < n; ++i)
      grown(i, n) = grown(n, i) = D.kernel()->eval(points[static_cast<std::size_t>(i)] - r.point);
    grown(n, n) = D.kernel()->eval(Point::filled(domain.dim(), 0.0));
    gram = std::move(grown);
    beta.conservativeResize(n + 1);
    beta[n] = 0;
    ++out.insertions;
  }

  for (std::size_t i = 0; i < points.size(); ++i) out.mu.add(beta[static_cast<Eigen::Index>(i)], points[i]);
  return out;
}

Certification certify_step(const DiscreteMeasure& mu, const WeightedKernelSum& eta, double lambda,
                           const ParticleToWaveOperator& D, const Cube& domain, double epsilon,
                           const BnbOptions& bnb) {
  WeightedKernelSum zeta = eta;
  zeta.add_sum(D.apply(mu));
  zeta.add_constant(lambda);
  BnbOptions opts = bnb;
  opts.tolerance = epsilon / 10;
  opts.threshold.reset();
  const BnbResult r = minimise(zeta, domain, opts);

  Certification c;
  c.epsilon = epsilon;
  c.min_value = r.value;
  c.max_on_support = -std::numeric_limits<double>::infinity();
  for (const auto& s : mu.spikes())
    if (s.weight != 0) c.max_on_support = std::max(c.max_on_support, zeta.eval(s.location));
  const double slack = 1.1 * epsilon;
  c.passed = c.min_value >= -slack && c.max_on_support <= slack;
  return c;
}

// ---------------------------------------------------------------------------
// Proximal methods

SolverResult run_mu_fb(const Problem& p, const SolverConfig& cfg) {
  require_l2(p, "forward-backward");
  check_config(p, cfg);
  const double tau = cfg.tau > 0 ? cfg.tau : 0.99 / p.L;
  SolverResult out;
  RunLogger log(p, cfg, out.record);
  log.initial(out.mu);
  for (int k = 0; k < cfg.max_outer; ++k) {
    log.begin_step();
    const WeightedKernelSum eta = proximal_eta(p, forward(p, out.mu) - p.b, tau, out.mu);
    const InsertionSettings s = insertion_settings(cfg, k);
    InsertionResult res = insert_and_adjust(out.mu, eta, tau * p.alpha, *p.D, p.domain(), s);
    out.mu = prune(res.mu);
    out.record.taus.push_back(tau);
    out.record.inner_converged = out.record.inner_converged && res.inner_converged;
    log.end_step(k + 1, out.mu, res.inner_iterations, 0, [&] {
      Certification c = certify_step(out.mu, eta, tau * p.alpha, *p.D, p.domain(), s.epsilon, cfg.bnb);
      c.iter = k + 1;
      c.capped = res.capped;
      return c;
    });
  }
  finish_proximal(p, cfg, out);
  return out;
}

SolverResult run_mu_fista(const Problem& p, const SolverConfig& cfg) {
  require_l2(p, "inertial forward-backward");
  check_config(p, cfg);
  const double tau = cfg.tau > 0 ? cfg.tau : 0.99 / p.L;
  SolverResult out;
  RunLogger log(p, cfg, out.record);
  log.initial(out.mu);
  DiscreteMeasure inertial = out.mu;
  double lambda = 1;
  for (int k = 0; k < cfg.max_outer; ++k) {
    log.begin_step();
    const WeightedKernelSum eta = proximal_eta(p, forward(p, inertial) - p.b, tau, inertial);
    const InsertionSettings s = insertion_settings(cfg, k);
    InsertionResult res = insert_and_adjust(inertial, eta, tau * p.alpha, *p.D, p.domain(), s);

    const double next_lambda = next_inertia(lambda);
    const double theta = next_lambda * (1 / lambda - 1);
    lambda = next_lambda;
    DiscreteMeasure next = res.mu;
    DiscreteMeasure next_inertial = next.combined(1 + theta, out.mu, -theta);

    // Drop spikes that vanish in both the new iterate and the new base.
    auto zero_in = [](const DiscreteMeasure& m, const Point& x) {
      for (const auto& s : m.spikes())
        if (s.location == x) return s.weight == 0;
      return true;
    };
    DiscreteMeasure kept_next, kept_inertial;
    for (const auto& sp : next.spikes())
      if (sp.weight != 0 || !zero_in(next_inertial, sp.location)) kept_next.add(sp.weight, sp.location);
    for (const auto& sp : next_inertial.spikes())
      if (sp.weight != 0 || !zero_in(next, sp.location)) kept_inertial.add(sp.weight, sp.location);
    const DiscreteMeasure step_result = prune(next);
    out.mu = std::move(kept_next);
    inertial = std::move(kept_inertial);

    out.record.taus.push_back(tau);
    out.record.inner_converged = out.record.inner_converged && res.inner_converged;
    log.end_step(k + 1, out.mu, res.inner_iterations, 0, [&] {
      Certification c = certify_step(step_result, eta, tau * p.alpha, *p.D, p.domain(), s.epsilon, cfg.bnb);
      c.iter = k + 1;
      c.capped = res.capped;
      return c;
    });
  }
  finish_proximal(p, cfg, out);
  return out;
}

SolverResult run_mu_pdps(const Problem& p, const SolverConfig& cfg) {
  check_config(p, cfg);
  const bool l2 = p.data_term == DataTerm::l2_squared;
  const Acceleration accel = cfg.acceleration.value_or(l2 ? Acceleration::strongly_convex_dual : Acceleration::none);
  if (accel == Acceleration::strongly_convex_dual && !l2)
    throw std::invalid_argument("primal-dual: dual acceleration requires the squared data term");
  double tau = cfg.tau > 0 ? cfg.tau : 0.5 / std::sqrt(p.L);
  double sigma = cfg.sigma > 0 ? cfg.sigma : 1.98 / std::sqrt(p.L);
  // tau_{k+1} = tau_k / omega_k and sigma_{k+1} = sigma_k omega_k leave the
  // product unchanged, so tau is recovered from it to avoid drift.
  const double product = tau * sigma;

  SolverResult out;
  out.y = l2 ? Eigen::VectorXd(-p.b) : Eigen::VectorXd((-p.b).array().sign());
  RunLogger log(p, cfg, out.record);
  log.initial(out.mu);
  Eigen::VectorXd Amu = Eigen::VectorXd::Zero(p.b.size());
  for (int k = 0; k < cfg.max_outer; ++k) {
    log.begin_step();
    const WeightedKernelSum eta = proximal_eta(p, out.y, tau, out.mu);
    const InsertionSettings s = insertion_settings(cfg, k);
    InsertionResult res = insert_and_adjust(out.mu, eta, tau * p.alpha, *p.D, p.domain(), s);
    const DiscreteMeasure next = prune(res.mu);
    out.record.taus.push_back(tau);
    out.record.sigmas.push_back(sigma);
    const double step_tau = tau;

    const double omega = accel == Acceleration::strongly_convex_dual ? 1 / std::sqrt(1 + sigma) : 1.0;
    if (accel == Acceleration::strongly_convex_dual) {
      sigma *= omega;
      tau = product / sigma;
    }
    const Eigen::VectorXd Anext = forward(p, next);
    const Eigen::VectorXd arg = out.y + sigma * ((1 + omega) * Anext - omega * Amu);
    out.y = l2 ? prox_dual_l2sq(arg, sigma, p.b) : prox_dual_l1(arg, sigma, p.b);
    Amu = Anext;
    out.mu = next;

    out.record.inner_converged = out.record.inner_converged && res.inner_converged;
    log.end_step(k + 1, out.mu, res.inner_iterations, 0, [&] {
      Certification c = certify_step(out.mu, eta, step_tau * p.alpha, *p.D, p.domain(), s.epsilon, cfg.bnb);
      c.iter = k + 1;
      c.capped = res.capped;
      return c;
    });
  }
  finish_proximal(p, cfg, out);
  return out;
}

// ---------------------------------------------------------------------------
// Conditional gradient

SolverResult run_fw(const Problem& p, const SolverConfig& cfg, FwVariant variant) {
  require_l2(p, "conditional gradient");
  check_config(p, cfg);
  SolverResult out;
  RunLogger log(p, cfg, out.record);
  log.initial(out.mu);
  for (int k = 0; k < cfg.max_outer; ++k) {
    log.begin_step();
    const double eps = cfg.schedule(k + 1);
    const Eigen::VectorXd residual = forward(p, out.mu) - p.b;
    const WeightedKernelSum v = preadjoint(p, residual);

    // Insert at the most negative point of v while it violates v >= -alpha.
    BnbOptions bnb = cfg.bnb;
    bnb.tolerance = eps;
    bnb.threshold = -p.alpha;
    const BnbResult r = minimise(v, p.domain(), bnb);
    bool duplicate = false;
    for (const auto& s : out.mu.spikes()) duplicate = duplicate || s.location == r.point;
    const bool insert = r.value < -p.alpha && !duplicate && out.mu.size() < cfg.max_spikes;

    int inner = 0;
    if (variant == FwVariant::relaxed) {
      if (insert) {
        double col2 = 0;
        for (const auto& [idx, a] : p.A->column(r.point)) col2 += a * a;
        out.mu.add(col2 > 0 ? std::max(0.0, -(r.value + p.alpha) / col2) : 0.0, r.point);
      }
      const std::vector<Point> locs = support_points(out.mu);
      const Eigen::MatrixXd AS = p.A->matrix(locs);
      const Eigen::MatrixXd G = AS.transpose() * AS;
      const double norm = gershgorin_bound(G);
      if (norm > 0) {
        const double step = 0.99 / norm;
        const Eigen::VectorXd beta = weight_vector(out.mu);
        const Eigen::VectorXd next =
            prox_nonneg_l1(beta - step * (G * beta - AS.transpose() * p.b), step * p.alpha);
        for (std::size_t i = 0; i < out.mu.size(); ++i) out.mu[i].weight = next[static_cast<Eigen::Index>(i)];
      }
      inner = 1;
    } else {
      if (insert) out.mu.add(0.0, r.point);
      const std::vector<Point> locs = support_points(out.mu);
      if (!locs.empty()) {
        const WeightSolution sol = solve_weights_full(p.A->matrix(locs), p.b, p.alpha, 0.1 * eps, 2000,
                                                      weight_vector(out.mu));
        for (std::size_t i = 0; i < out.mu.size(); ++i) out.mu[i].weight = sol.beta[static_cast<Eigen::Index>(i)];
        inner = sol.iterations;
        out.record.inner_converged = out.record.inner_converged && sol.converged;
      }
    }
    const MergeResult merged = merge_with_data_guard(p, prune(out.mu), cfg.merge_radius);
    out.mu = prune(merged.measure);
    log.end_step(k + 1, out.mu, inner, merged.merges);
  }
  return out;
}

// ---------------------------------------------------------------------------

DiscreteMeasure postprocess_weight_opt(const Problem& p, const DiscreteMeasure& mu, double tolerance,
                                       int max_iterations) {
  require_l2(p, "weight postprocessing");
  if (mu.empty()) return mu;
  const std::vector<Point> locs = support_points(mu);
  const Eigen::VectorXd start = weight_vector(mu).cwiseMax(0.0);
  const WeightSolution sol = solve_weights_full(p.A->matrix(locs), p.b, p.alpha, tolerance, max_iterations, start);
  DiscreteMeasure out;
  for (std::size_t i = 0; i < locs.size(); ++i) out.add(sol.beta[static_cast<Eigen::Index>(i)], locs[i]);
  out = prune(out);
  return evaluate_objective(p, out) <= evaluate_objective(p, mu) ? out : mu;
}

MergeResult merge_with_data_guard(const Problem& p, const DiscreteMeasure& mu, double radius) {
  double current = data_term_value(p, mu);
  return merge_spikes(mu, radius, [&](const DiscreteMeasure& candidate) {
    const double f = data_term_value(p, candidate);
    if (f > current) return false;
    current = f;
    return true;
  });
}

double lagrangian_gap(const Problem& p, const DiscreteMeasure& mu, const Eigen::VectorXd& y,
                      const DiscreteMeasure& mu_ref, const Eigen::VectorXd& y_ref) {
  auto conjugate = [&](const Eigen::VectorXd& z) {
    return p.data_term == DataTerm::l2_squared ? 0.5 * z.squaredNorm() + z.dot(p.b) : z.dot(p.b);
  };
  auto lagrangian = [&](const DiscreteMeasure& m, const Eigen::VectorXd& z) {
    return p.alpha * radon_norm(m) + forward(p, m).dot(z) - conjugate(z);
  };
  return lagrangian(mu, y_ref) - lagrangian(mu_ref, y);
}

}  // namespace pointsource
