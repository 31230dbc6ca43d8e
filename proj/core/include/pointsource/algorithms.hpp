#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pointsource/bisection_tree.hpp"
#include "pointsource/measure.hpp"
#include "pointsource/operators.hpp"
#include "pointsource/subsolvers.hpp"

namespace pointsource {

/// epsilon_k = c / (1 + theta k)^p.
struct ToleranceSchedule {
  double c = 0.5;
  double theta = 0.2;
  double p = 1.4;

  double operator()(int k) const;
};

enum class DataTerm { l2_squared, l1 };
enum class Acceleration { none, strongly_convex_dual };

/// min_{mu >= 0} F(mu) + alpha |mu| with F = 1/2 |A mu - b|^2 or |A mu - b|_1.
struct Problem {
  std::shared_ptr<const SensorGridOperator> A;
  std::shared_ptr<const ParticleToWaveOperator> D;
  Eigen::VectorXd b;
  double alpha = 0;
  DataTerm data_term = DataTerm::l2_squared;
  /// A_* A <= L D.
  double L = 0;

  /// Builds A, D and L from the sensor layout and spread parameters.
  static Problem make(const Cube& domain, int sensors_per_axis, double sensor_fraction, const SpreadParams& spread,
                      Eigen::VectorXd b, double alpha, DataTerm data_term);

  const Cube& domain() const { return A->domain(); }
};

struct SolverConfig {
  /// Primal step; 0 selects 0.99 / L for the forward-backward methods and
  /// 0.5 / sqrt(L) for the primal-dual method.
  double tau = 0;
  /// Initial dual step of the primal-dual method; 0 selects 1.98 / sqrt(L).
  double sigma = 0;
  double kappa = 0.1;
  ToleranceSchedule schedule;
  int max_outer = 2000;
  /// During the first `bootstrap_insertions` outer iterations at most one
  /// point is inserted per step.
  int bootstrap_insertions = 10;
  /// Primal-dual only; `strongly_convex_dual` requires the squared data term.
  std::optional<Acceleration> acceleration;
  /// Tightens the weight accuracy to keep the forward-backward iterates
  /// nearly monotone.
  bool tightened = false;
  InnerSolverConfig inner;
  BnbOptions bnb;
  double merge_radius = 0.02;
  /// Merge the final iterate of the proximal methods.
  bool merge_final = true;
  /// Sanity cap on the number of spikes after pruning.
  std::size_t max_spikes = 1000;

  /// Diagnostics collected at logged iterations (excluded from CPU time).
  bool certify = false;
  bool post_values = true;
};

/// One sampled row of a run.
struct RecordRow {
  int iter = 0;
  double cpu_time_s = 0;
  double value = 0;
  std::optional<double> post_value;
  std::size_t spike_count = 0;
  double inner_iters = 0;
  int merges = 0;

  friend bool operator==(const RecordRow&, const RecordRow&) = default;
};

/// Independent check, at a logged iteration, that the step met its
/// two-sided tolerance condition.
struct Certification {
  int iter = 0;
  double epsilon = 0;
  double min_value = 0;
  double max_on_support = 0;
  /// The bootstrap cap stopped insertion before the exit test passed.
  bool capped = false;
  bool passed = false;
};

struct RunRecord {
  std::vector<RecordRow> rows;
  std::vector<Certification> certifications;
  /// Objective after every outer iteration; entry 0 is the initial value.
  std::vector<double> values;
  /// Step lengths used at each outer iteration (primal-dual: tau_k, sigma_k).
  std::vector<double> taus;
  std::vector<double> sigmas;
  bool inner_converged = true;
};

/// Iterations at which a RunRecord row is written: 0..10, then every 10 up
/// to 100, every 100 up to 2000, every 1000 beyond.
bool is_sample_point(int k);

struct SolverResult {
  DiscreteMeasure mu;
  /// Dual iterate of the primal-dual method; empty otherwise.
  Eigen::VectorXd y;
  RunRecord record;
};

/// F(mu) + alpha |mu|.
double evaluate_objective(const Problem& p, const DiscreteMeasure& mu);
/// F(mu) alone.
double data_term_value(const Problem& p, const DiscreteMeasure& mu);
/// A_*(A mu - b) as an evaluable sum (squared data term).
WeightedKernelSum data_gradient(const Problem& p, const DiscreteMeasure& mu);

struct InsertionSettings {
  double epsilon = 0;
  double kappa = 0.1;
  /// Return after the first inserted point.
  bool single_insertion = false;
  /// Multiplier k of the tightened accuracy kappa eps / (1 + k(|beta|_1 + |beta_0|_1)).
  std::optional<double> tighten;
  InnerSolverConfig inner;
  BnbOptions bnb;
  std::size_t max_points = 1000;
};

struct InsertionResult {
  DiscreteMeasure mu;
  int inner_iterations = 0;
  int insertions = 0;
  bool capped = false;
  bool inner_converged = true;
};

/// Finds nu on supp(base) plus inserted points with
///   D nu + eta + lambda >= -epsilon  on the domain,
///   |D nu + eta + lambda| <= kappa epsilon / (1 + |beta|_1)  on supp nu,
/// by alternating weight solves and global minimisation of
/// D nu + eta + lambda, inserting the minimiser while it lies below -epsilon.
InsertionResult insert_and_adjust(const DiscreteMeasure& base, const WeightedKernelSum& eta, double lambda,
                                  const ParticleToWaveOperator& D, const Cube& domain, const InsertionSettings& s);

/// Inertial parameters: lambda_{k+1} = 2 lambda_k / (lambda_k + sqrt(4 + lambda_k^2)).
double next_inertia(double lambda);

SolverResult run_mu_fb(const Problem& p, const SolverConfig& cfg);
SolverResult run_mu_fista(const Problem& p, const SolverConfig& cfg);
SolverResult run_mu_pdps(const Problem& p, const SolverConfig& cfg);

enum class FwVariant { relaxed, fully_corrective };
SolverResult run_fw(const Problem& p, const SolverConfig& cfg, FwVariant variant);

/// Reoptimises the weights on the fixed support (squared data term); the
/// objective does not increase.
DiscreteMeasure postprocess_weight_opt(const Problem& p, const DiscreteMeasure& mu, double tolerance = 1e-9,
                                       int max_iterations = 2000);

/// Greedy merging accepted only when the data term does not increase.
MergeResult merge_with_data_guard(const Problem& p, const DiscreteMeasure& mu, double radius);

/// Lagrangian gap L(mu, y_ref) - L(mu_ref, y) of the saddle-point form
/// min_mu max_y alpha |mu| + <A mu, y> - F_0^*(y); non-negative when
/// (mu_ref, y_ref) is a saddle point.
double lagrangian_gap(const Problem& p, const DiscreteMeasure& mu, const Eigen::VectorXd& y,
                      const DiscreteMeasure& mu_ref, const Eigen::VectorXd& y_ref);

/// Independent check of the step condition of a proximal step with linear
/// term `eta` and shift `lambda` at tolerance `epsilon` (search at epsilon / 10).
Certification certify_step(const DiscreteMeasure& mu, const WeightedKernelSum& eta, double lambda,
                           const ParticleToWaveOperator& D, const Cube& domain, double epsilon,
                           const BnbOptions& bnb);

}  // namespace pointsource
