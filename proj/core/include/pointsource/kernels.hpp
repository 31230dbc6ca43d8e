#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "pointsource/geometry.hpp"

namespace pointsource {

/// Second-order expansion of a kernel about the midpoint of a cube, used by
/// branch-and-bound both as a candidate-maximum model and for Taylor bounds.
///
/// `hessian_bound(i, j)` bounds |d^2 k / dx_i dx_j| over the whole cube and is
/// only meaningful when `smooth` is set, i.e. the kernel is C^1 with bounded
/// second derivatives on the cube (no kink or jump inside it).
struct LocalModel {
  int dim = 0;
  double value = 0;
  std::array<double, kMaxDim> gradient{};
  std::array<double, kMaxDim * kMaxDim> hessian{};
  std::array<double, kMaxDim * kMaxDim> hessian_bound{};
  bool smooth = false;

  double& h(int i, int j) { return hessian[i * kMaxDim + j]; }
  double h(int i, int j) const { return hessian[i * kMaxDim + j]; }
  double& hb(int i, int j) { return hessian_bound[i * kMaxDim + j]; }
  double hb(int i, int j) const { return hessian_bound[i * kMaxDim + j]; }
};

/// A compactly supported scalar function on R^d, centred at the origin.
///
/// Implementations guarantee `eval(x) == 0` outside `support()`, and that
/// `bounds(c)` encloses the range of the kernel over the cube `c`.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual int dim() const = 0;
  virtual double eval(const Point& x) const = 0;
  virtual Cube support() const = 0;
  virtual Interval bounds(const Cube& c) const = 0;
  /// Euclidean Lipschitz factor over R^d.
  virtual double lipschitz() const = 0;
  virtual LocalModel local_model(const Cube& c) const = 0;
};

/// One-dimensional kernel that is symmetric, non-negative and non-increasing
/// in |t| on its support [-half_width, half_width]. Every family here has that
/// shape, which makes interval bounds exact: the maximum sits at the point
/// nearest to zero and the minimum at the point farthest from it.
class Kernel1D : public Kernel {
 public:
  virtual double eval(double t) const = 0;
  virtual double derivative(double t) const = 0;
  virtual double second_derivative(double t) const = 0;
  virtual double half_width() const = 0;
  /// Points where the kernel or its first derivative is discontinuous.
  virtual std::span<const double> breakpoints() const = 0;
  /// sup |k''| over the smooth pieces.
  virtual double curvature_bound() const = 0;
  /// sup |k'| over [lo, hi]; the default is the global Lipschitz factor.
  virtual double derivative_bound(double lo, double hi) const;

  Interval bounds(double lo, double hi) const;
  bool smooth_on(double lo, double hi) const;

  int dim() const final { return 1; }
  double eval(const Point& x) const final { return eval(x[0]); }
  Cube support() const final { return Cube::centred(1, half_width()); }
  Interval bounds(const Cube& c) const final { return bounds(c.lower(0), c.upper(0)); }
  LocalModel local_model(const Cube& c) const final;
};

/// tri_b(t) = max(0, 1 - |t|/b).
class HatFunction final : public Kernel1D {
 public:
  explicit HatFunction(double b);
  using Kernel1D::eval;
  double eval(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double) const override { return 0; }
  double half_width() const override { return b_; }
  std::span<const double> breakpoints() const override { return breaks_; }
  double lipschitz() const override { return 1 / b_; }
  double curvature_bound() const override { return 0; }

 private:
  double b_;
  std::array<double, 3> breaks_;
};

/// The "fast" spread: (4/sigma) times the autoconvolution of tri_{1/2},
/// evaluated at t/sigma. A C^2 piecewise cubic with unit mass on
/// [-sigma, sigma].
class FastSpread1D final : public Kernel1D {
 public:
  explicit FastSpread1D(double sigma);
  using Kernel1D::eval;
  double eval(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double half_width() const override { return sigma_; }
  std::span<const double> breakpoints() const override { return {}; }
  double lipschitz() const override;
  double curvature_bound() const override;
  /// Integral of the spread from -infinity to t.
  double antiderivative(double t) const;
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// C exp(-t^2 / (2 sigma^2)) on [-a, a], zero outside. The default scale
/// gives the uncut Gaussian unit mass.
class CutGaussian1D final : public Kernel1D {
 public:
  CutGaussian1D(double sigma, double cutoff);
  CutGaussian1D(double sigma, double cutoff, double scale);
  using Kernel1D::eval;
  double eval(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double half_width() const override { return a_; }
  std::span<const double> breakpoints() const override { return breaks_; }
  double lipschitz() const override;
  double curvature_bound() const override;
  double derivative_bound(double lo, double hi) const override;

  double sigma() const { return sigma_; }
  double cutoff() const { return a_; }
  double scale() const { return c_; }
  /// The uncut Gaussian and its derivatives.
  double gaussian(double t) const;
  double gaussian_derivative(double t) const;
  /// sup |gaussian'| over |t| in [lo, hi], 0 <= lo <= hi.
  double gaussian_derivative_bound(double lo, double hi) const;
  /// Integral of the uncut Gaussian over [lo, hi].
  double gaussian_integral(double lo, double hi) const;

 private:
  double sigma_, a_, c_;
  std::array<double, 2> breaks_;
};

/// max(0, 2a - |t|) * C exp(-t^2 / (2 sigma^2)): the autoconvolution of the
/// cut-off indicator times a Gaussian.
class TriangularGaussianKernel1D final : public Kernel1D {
 public:
  TriangularGaussianKernel1D(double sigma, double cutoff);
  TriangularGaussianKernel1D(double sigma, double cutoff, double scale);
  using Kernel1D::eval;
  double eval(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double half_width() const override { return 2 * a_; }
  std::span<const double> breakpoints() const override { return breaks_; }
  double lipschitz() const override;
  double curvature_bound() const override;

 private:
  double sigma_, a_, c_;
  std::array<double, 3> breaks_;
};

/// The sensor-convolved spread chi_[-b,b] * psi for a fast spread psi, in
/// closed form (difference of the piecewise-quartic antiderivative).
class BoxConvolvedFastSpread final : public Kernel1D {
 public:
  BoxConvolvedFastSpread(double sensor_half_width, FastSpread1D spread);
  using Kernel1D::eval;
  double eval(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double half_width() const override { return b_ + spread_.half_width(); }
  std::span<const double> breakpoints() const override { return {}; }
  double lipschitz() const override;
  double curvature_bound() const override;

 private:
  double b_;
  FastSpread1D spread_;
};

/// The sensor-convolved spread chi_[-b,b] * psi for a cut Gaussian psi,
/// via the error function.
class BoxConvolvedCutGaussian final : public Kernel1D {
 public:
  BoxConvolvedCutGaussian(double sensor_half_width, CutGaussian1D spread);
  using Kernel1D::eval;
  double eval(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double half_width() const override { return b_ + spread_.cutoff(); }
  std::span<const double> breakpoints() const override { return breaks_; }
  double lipschitz() const override;
  double curvature_bound() const override;

 private:
  double b_;
  CutGaussian1D spread_;
  std::array<double, 4> breaks_;
};

/// k(x_1, ..., x_d) = k_1(x_1) ... k_d(x_d).
class ProductKernel final : public Kernel {
 public:
  explicit ProductKernel(std::vector<std::shared_ptr<const Kernel1D>> factors);
  /// The same 1D factor along every axis.
  static std::shared_ptr<const ProductKernel> uniform(std::shared_ptr<const Kernel1D> factor, int dim);

  int dim() const override { return static_cast<int>(factors_.size()); }
  double eval(const Point& x) const override;
  Cube support() const override;
  Interval bounds(const Cube& c) const override;
  double lipschitz() const override;
  LocalModel local_model(const Cube& c) const override;

  const Kernel1D& factor(int i) const { return *factors_[i]; }

 private:
  std::vector<std::shared_ptr<const Kernel1D>> factors_;
};

}  // namespace pointsource
