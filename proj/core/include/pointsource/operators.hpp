#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pointsource/kernel_sum.hpp"
#include "pointsource/kernels.hpp"
#include "pointsource/measure.hpp"

namespace pointsource {

enum class SpreadFamily { fast, cut_gaussian };

/// Spread psi of the forward operator together with the matching kernel rho
/// of the particle-to-wave operator.
///
/// fast:          psi = rho = FastSpread1D(sigma).
/// cut_gaussian:  psi = CutGaussian1D(sigma, cutoff),
///                rho = TriangularGaussianKernel1D(kernel_sigma, cutoff).
struct SpreadParams {
  SpreadFamily family = SpreadFamily::cut_gaussian;
  double sigma = 0.05;
  double kernel_sigma = 0.05;
  double cutoff = 0.15;

  static SpreadParams fast(double sigma) { return {SpreadFamily::fast, sigma, sigma, sigma}; }
  static SpreadParams cut_gaussian(double sigma_u, double sigma_v, double cutoff) {
    return {SpreadFamily::cut_gaussian, sigma_u, sigma_v, cutoff};
  }
};

std::shared_ptr<const Kernel1D> make_spread(const SpreadParams& p);
std::shared_ptr<const Kernel1D> make_wave_kernel(const SpreadParams& p);
std::shared_ptr<const Kernel1D> make_sensor_kernel(const SpreadParams& p, double sensor_half_width);

/// Forward operator A: measures -> R^{#G} over a regular lattice of box
/// sensors, [A mu]_z = sum_i w_i (theta_0 * psi)(x_i - z).
class SensorGridOperator {
 public:
  /// `sensors_per_axis` sensors per axis at the cell centres of a regular
  /// grid over `domain`; sensor half-width b = fraction * spacing.
  SensorGridOperator(Cube domain, int sensors_per_axis, double sensor_fraction, SpreadParams spread);

  int dim() const { return domain_.dim(); }
  const Cube& domain() const { return domain_; }
  std::size_t num_sensors() const { return sensors_.size(); }
  int sensors_per_axis() const { return n_; }
  double spacing(int axis) const { return domain_.width(axis) / n_; }
  double sensor_half_width() const { return b_; }
  const std::vector<Point>& sensors() const { return sensors_; }
  const SpreadParams& spread_params() const { return spread_; }

  const std::shared_ptr<const Kernel>& spread() const { return spread_kernel_; }
  const std::shared_ptr<const Kernel>& sensor_kernel() const { return sensor_kernel_; }

  /// Worker count for `apply`; results are reproducible for a fixed count.
  void set_jobs(int jobs) { jobs_ = std::max(1, jobs); }
  int jobs() const { return jobs_; }

  std::vector<double> apply(const DiscreteMeasure& mu) const;
  /// Nonzero entries of A delta_x as (sensor index, value).
  std::vector<std::pair<std::size_t, double>> column(const Point& x) const;
  /// A_* y = sum_z y_z (theta_0 * psi)(. - z); zero entries are skipped.
  WeightedKernelSum preadjoint(std::span<const double> y) const;
  /// Dense A restricted to the given locations (#G x n).
  Eigen::MatrixXd matrix(std::span<const Point> locations) const;

 private:
  void accumulate(const Spike& s, std::vector<double>& out) const;

  Cube domain_;
  int n_;
  double b_;
  SpreadParams spread_;
  std::shared_ptr<const Kernel1D> sensor_1d_;
  std::shared_ptr<const Kernel> spread_kernel_;
  std::shared_ptr<const Kernel> sensor_kernel_;
  std::vector<Point> sensors_;
  int jobs_ = 1;
};

/// D mu = rho * mu for a symmetric positive semi-definite kernel rho.
class ParticleToWaveOperator {
 public:
  explicit ParticleToWaveOperator(std::shared_ptr<const Kernel> rho) : rho_(std::move(rho)) {}

  const std::shared_ptr<const Kernel>& kernel() const { return rho_; }
  int dim() const { return rho_->dim(); }

  WeightedKernelSum apply(const DiscreteMeasure& mu, double scale = 1.0) const;
  double eval(const DiscreteMeasure& mu, const Point& x) const;
  /// (rho(x_i - x_j))_{ij}.
  Eigen::MatrixXd gram(std::span<const Point> locations) const;

 private:
  std::shared_ptr<const Kernel> rho_;
};

/// <mu, nu>_D = sum_ij w_i v_j rho(x_i - y_j).
double d_inner(const ParticleToWaveOperator& D, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// A_* A <= L D with L = L0 * L1.
struct SmoothnessConstants {
  double L0 = 0;
  double L1 = 0;
  double L = 0;
};

/// Throws std::invalid_argument for a cut-Gaussian pairing whose spread is
/// narrower than the kernel Gaussian, where the bound does not hold.
SmoothnessConstants estimate_smoothness(const SpreadParams& spread, double sensor_half_width, int dim);

}  // namespace pointsource
