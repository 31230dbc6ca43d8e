#include "pointsource/subsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

namespace pointsource {

double QuadraticWeightProblem::objective(const Eigen::VectorXd& beta) const {
  return 0.5 * beta.dot(D * beta) + eta.dot(beta) + lambda * beta.lpNorm<1>();
}

Eigen::VectorXd prox_nonneg_l1(const Eigen::VectorXd& v, double t) {
  if (t < 0) throw std::invalid_argument("prox_nonneg_l1: negative threshold");
  return (v.array() - t).max(0.0).matrix();
}

double gershgorin_bound(const Eigen::MatrixXd& D) {
  if (D.size() == 0) return 0;
  return D.cwiseAbs().rowwise().sum().maxCoeff();
}

namespace {

void check_problem(const QuadraticWeightProblem& p) {
  if (p.D.rows() != p.D.cols() || p.D.rows() != p.eta.size())
    throw std::invalid_argument("weight problem: dimension mismatch");
  if (p.lambda < 0) throw std::invalid_argument("weight problem: negative lambda");
}

Eigen::VectorXd start_point(const QuadraticWeightProblem& p, const Eigen::VectorXd& beta0) {
  if (beta0.size() == 0) return Eigen::VectorXd::Zero(p.size());
  if (beta0.size() != p.size()) throw std::invalid_argument("weight problem: warm start has wrong size");
  return beta0.cwiseMax(0.0);
}

double target(const InnerSolverConfig& cfg, const AccuracyRule& rule, const Eigen::VectorXd& beta) {
  return rule ? rule(beta) : cfg.tolerance;
}

WeightSolution finish(const QuadraticWeightProblem& p, Eigen::VectorXd beta, int iterations, bool converged) {
  WeightSolution s;
  s.residual = weight_residual(p, beta);
  s.w = weight_certificate(p, beta);
  s.beta = std::move(beta);
  s.iterations = iterations;
  s.converged = converged;
  return s;
}

WeightSolution forward_backward(const QuadraticWeightProblem& p, const InnerSolverConfig& cfg,
                                const AccuracyRule& rule, Eigen::VectorXd beta, int used) {
  const double norm = gershgorin_bound(p.D);
  const double tau = cfg.step > 0 ? cfg.step : (norm > 0 ? 0.99 / norm : 1.0);
  int it = used;
  while (true) {
    if (weight_residual(p, beta) <= target(cfg, rule, beta)) return finish(p, std::move(beta), it, true);
    if (it >= cfg.max_iterations) return finish(p, std::move(beta), it, false);
    beta = prox_nonneg_l1(beta - tau * (p.D * beta + p.eta), tau * p.lambda);
    ++it;
  }
}

// Primal-dual active set iteration for the fixed-point equation
// beta = max(0, beta - tau (D beta + eta + lambda)): on the set where the
// inner argument is positive, solve D_II beta_I = -(eta + lambda)_I.
WeightSolution semismooth_newton(const QuadraticWeightProblem& p, const InnerSolverConfig& cfg,
                                 const AccuracyRule& rule, Eigen::VectorXd beta) {
  const Eigen::Index n = p.size();
  const double norm = gershgorin_bound(p.D);
  const double tau = norm > 0 ? 1 / norm : 1.0;
  const Eigen::VectorXd c = p.eta.array() + p.lambda;
  std::set<std::vector<Eigen::Index>> seen;
  int it = 0;
  while (it < cfg.max_iterations) {
    // Newton iterates may leave the feasible set; only feasible ones can stop.
    if (beta.minCoeff() >= 0 && weight_residual(p, beta) <= target(cfg, rule, beta))
      return finish(p, std::move(beta), it, true);
    const Eigen::VectorXd arg = beta - tau * (p.D * beta + c);
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i)
      if (arg[i] > 0) active.push_back(i);
    if (!seen.insert(active).second) break;
    ++it;
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    if (!active.empty()) {
      const auto k = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd DII(k, k);
      Eigen::VectorXd rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = -c[active[a]];
        for (Eigen::Index b = 0; b < k; ++b) DII(a, b) = p.D(active[a], active[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(DII);
      if (llt.info() != Eigen::Success) break;
      const Eigen::VectorXd sol = llt.solve(rhs);
      if (!sol.allFinite()) break;
      for (Eigen::Index a = 0; a < k; ++a) next[active[a]] = sol[a];
    }
    beta = next;
  }
  // Singular system, cycling, or a stationary point with negative entries:
  // continue from the last non-negative point with forward-backward.
  return forward_backward(p, cfg, rule, beta.cwiseMax(0.0), it);
}

}  // namespace

double weight_residual(const QuadraticWeightProblem& p, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd g = p.D * beta + p.eta;
  double r = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double s = g[i] + p.lambda;
    r = std::max(r, beta[i] > 0 ? std::abs(s) : std::max(0.0, -s));
  }
  return r;
}

Eigen::VectorXd weight_certificate(const QuadraticWeightProblem& p, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd g = p.D * beta + p.eta;
  Eigen::VectorXd w(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (beta[i] > 0)
      w[i] = 1;
    else
      w[i] = p.lambda > 0 ? std::clamp(-g[i] / p.lambda, -1.0, 1.0) : 0.0;
  }
  return w;
}

WeightSolution solve_weights(const QuadraticWeightProblem& p, const InnerSolverConfig& cfg, const AccuracyRule& rule,
                             const Eigen::VectorXd& beta0) {
  check_problem(p);
  if (cfg.max_iterations < 1) throw std::invalid_argument("solve_weights: max_iterations must be positive");
  Eigen::VectorXd beta = start_point(p, beta0);
  if (p.size() == 0) return finish(p, beta, 0, true);
  if (cfg.method == InnerMethod::semismooth_newton) return semismooth_newton(p, cfg, rule, std::move(beta));
  return forward_backward(p, cfg, rule, std::move(beta), 0);
}

WeightSolution solve_weights_full(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double alpha, double tolerance,
                                  int max_iterations, const Eigen::VectorXd& beta0) {
  if (A.rows() != b.size()) throw std::invalid_argument("solve_weights_full: dimension mismatch");
  QuadraticWeightProblem p{A.transpose() * A, -(A.transpose() * b), alpha};
  InnerSolverConfig cfg;
  cfg.method = InnerMethod::forward_backward;
  cfg.tolerance = tolerance;
  cfg.max_iterations = std::max(1, max_iterations);
  return solve_weights(p, cfg, {}, beta0);
}

Eigen::VectorXd prox_dual_l2sq(const Eigen::VectorXd& y, double sigma, const Eigen::VectorXd& b) {
  if (!(sigma > 0)) throw std::invalid_argument("prox_dual_l2sq: sigma must be positive");
  return (y - sigma * b) / (1 + sigma);
}

Eigen::VectorXd prox_dual_l1(const Eigen::VectorXd& y, double sigma, const Eigen::VectorXd& b) {
  if (!(sigma > 0)) throw std::invalid_argument("prox_dual_l1: sigma must be positive");
  return (y - sigma * b).cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace pointsource
