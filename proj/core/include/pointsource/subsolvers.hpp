#pragma once

#include <functional>

#include <Eigen/Dense>

namespace pointsource {

/// min_{beta >= 0} 1/2 beta' D beta + eta' beta + lambda |beta|_1.
struct QuadraticWeightProblem {
  Eigen::MatrixXd D;
  Eigen::VectorXd eta;
  double lambda = 0;

  Eigen::Index size() const { return eta.size(); }
  double objective(const Eigen::VectorXd& beta) const;
};

enum class InnerMethod { forward_backward, semismooth_newton };

struct InnerSolverConfig {
  InnerMethod method = InnerMethod::semismooth_newton;
  /// Forward-backward step; 0 selects 0.99 / (Gershgorin bound on |D|).
  double step = 0;
  /// Stopping tolerance when no accuracy rule is supplied.
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

/// Maps the current weights to the required residual accuracy.
using AccuracyRule = std::function<double(const Eigen::VectorXd&)>;

struct WeightSolution {
  Eigen::VectorXd beta;
  /// Subgradient certificate: w_i = 1 where beta_i > 0, |w_i| <= 1.
  Eigen::VectorXd w;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

/// Componentwise max(0, v_i - t): the prox of t|.|_1 plus non-negativity.
Eigen::VectorXd prox_nonneg_l1(const Eigen::VectorXd& v, double t);

/// Gershgorin bound on the spectral norm of a symmetric matrix.
double gershgorin_bound(const Eigen::MatrixXd& D);

/// Optimality residual of the non-negative problem at beta: with
/// g = D beta + eta, |g_i + lambda| where beta_i > 0 and max(0, -(g_i + lambda))
/// where beta_i = 0.
double weight_residual(const QuadraticWeightProblem& p, const Eigen::VectorXd& beta);
/// The certificate attaining `weight_residual`.
Eigen::VectorXd weight_certificate(const QuadraticWeightProblem& p, const Eigen::VectorXd& beta);

/// Solves the weight problem until `weight_residual <= rule(beta)` (or the
/// configured tolerance without a rule). `beta0` warm-starts the iteration and
/// is clipped to be non-negative. The semismooth Newton path falls back to
/// forward-backward when its active-set systems are singular or cycle.
WeightSolution solve_weights(const QuadraticWeightProblem& p, const InnerSolverConfig& cfg,
                             const AccuracyRule& rule = {}, const Eigen::VectorXd& beta0 = {});

/// Non-negative lasso min_{beta >= 0} 1/2 |A beta - b|^2 + alpha |beta|_1 over a
/// fixed support, by forward-backward until the residual is at most
/// `tolerance` or `max_iterations` steps have been taken.
WeightSolution solve_weights_full(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double alpha,
                                  double tolerance, int max_iterations = 2000,
                                  const Eigen::VectorXd& beta0 = {});

/// prox of sigma F* for F = 1/2 |. - b|^2: (y - sigma b) / (1 + sigma).
Eigen::VectorXd prox_dual_l2sq(const Eigen::VectorXd& y, double sigma, const Eigen::VectorXd& b);
/// prox of sigma F* for F = |. - b|_1: clamp(y - sigma b, -1, 1).
Eigen::VectorXd prox_dual_l1(const Eigen::VectorXd& y, double sigma, const Eigen::VectorXd& b);

}  // namespace pointsource
