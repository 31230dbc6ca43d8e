#include "pointsource/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pointsource {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

double sign(double t) { return (t > 0) - (t < 0); }

}  // namespace

// ---------------------------------------------------------------------------
// Kernel1D

double Kernel1D::derivative_bound(double, double) const { return lipschitz(); }

Interval Kernel1D::bounds(double lo, double hi) const {
  const double nearest = (lo <= 0 && 0 <= hi) ? 0.0 : (lo > 0 ? lo : hi);
  const double farthest = std::abs(lo) > std::abs(hi) ? lo : hi;
  if (lo == hi) return {eval(lo), eval(lo)};
  // Closed forms are monotone in |t| only up to rounding; pad by a few ulps.
  const double top = eval(nearest), bottom = eval(farthest);
  constexpr double pad = 8 * std::numeric_limits<double>::epsilon();
  return {bottom - pad * std::abs(bottom), top + pad * std::abs(top)};
}

bool Kernel1D::smooth_on(double lo, double hi) const {
  // Inclusive: a jump sitting on the boundary of a closed interval still
  // breaks a Taylor bound taken from the midpoint.
  for (double p : breakpoints())
    if (lo <= p && p <= hi) return false;
  return true;
}

LocalModel Kernel1D::local_model(const Cube& c) const {
  const double lo = c.lower(0), hi = c.upper(0);
  const double m = 0.5 * (lo + hi);
  LocalModel model;
  model.dim = 1;
  model.value = eval(m);
  model.gradient[0] = derivative(m);
  model.h(0, 0) = second_derivative(m);
  model.hb(0, 0) = curvature_bound();
  model.smooth = smooth_on(lo, hi);
  return model;
}

// ---------------------------------------------------------------------------
// HatFunction

HatFunction::HatFunction(double b) : b_(b), breaks_{-b, 0.0, b} { require_positive(b, "hat half-width"); }

double HatFunction::eval(double t) const { return std::max(0.0, 1 - std::abs(t) / b_); }

double HatFunction::derivative(double t) const { return std::abs(t) < b_ ? -sign(t) / b_ : 0.0; }

// ---------------------------------------------------------------------------
// FastSpread1D

FastSpread1D::FastSpread1D(double sigma) : sigma_(sigma) { require_positive(sigma, "fast spread sigma"); }

double FastSpread1D::eval(double t) const {
  const double y = std::abs(t / sigma_);
  double p;
  if (y >= 1)
    return 0;
  else if (y >= 0.5)
    p = 2.0 / 3.0 * (1 - y) * (1 - y) * (1 - y);
  else
    p = 2 * y * y * y - 2 * y * y + 1.0 / 3.0;
  return 4 / sigma_ * p;
}

double FastSpread1D::derivative(double t) const {
  const double y = std::abs(t / sigma_);
  double dp;
  if (y >= 1)
    return 0;
  else if (y >= 0.5)
    dp = -2 * (1 - y) * (1 - y);
  else
    dp = 6 * y * y - 4 * y;
  return sign(t) * 4 / (sigma_ * sigma_) * dp;
}

double FastSpread1D::second_derivative(double t) const {
  const double y = std::abs(t / sigma_);
  double d2p;
  if (y >= 1)
    return 0;
  else if (y >= 0.5)
    d2p = 4 * (1 - y);
  else
    d2p = 12 * y - 4;
  return 4 / (sigma_ * sigma_ * sigma_) * d2p;
}

// max |P'| = 2/3 at |y| = 1/3; max |P''| = 4 at y = 0.
double FastSpread1D::lipschitz() const { return 8.0 / (3.0 * sigma_ * sigma_); }
double FastSpread1D::curvature_bound() const { return 16.0 / (sigma_ * sigma_ * sigma_); }

double FastSpread1D::antiderivative(double t) const {
  const double y = t / sigma_;
  double q;
  if (y <= -1) {
    q = 0;
  } else if (y <= -0.5) {
    const double u = y + 1;
    q = u * u * u * u / 6;
  } else if (y < 0.5) {
    q = 0.125 + sign(y) * y * y * y * y / 2 - 2.0 / 3.0 * y * y * y + y / 3;
  } else if (y < 1) {
    const double u = 1 - y;
    q = 0.25 - u * u * u * u / 6;
  } else {
    q = 0.25;
  }
  return 4 * q;
}

// ---------------------------------------------------------------------------
// CutGaussian1D

CutGaussian1D::CutGaussian1D(double sigma, double cutoff)
    : CutGaussian1D(sigma, cutoff, 1 / (std::sqrt(2 * std::numbers::pi) * sigma)) {}

CutGaussian1D::CutGaussian1D(double sigma, double cutoff, double scale)
    : sigma_(sigma), a_(cutoff), c_(scale), breaks_{-cutoff, cutoff} {
  require_positive(sigma, "Gaussian sigma");
  require_positive(cutoff, "Gaussian cut-off");
  require_positive(scale, "Gaussian scale");
}

double CutGaussian1D::gaussian(double t) const { return c_ * std::exp(-t * t / (2 * sigma_ * sigma_)); }

double CutGaussian1D::gaussian_derivative(double t) const { return -t / (sigma_ * sigma_) * gaussian(t); }

double CutGaussian1D::gaussian_derivative_bound(double lo, double hi) const {
  // |g'(t)| = t g(t) / sigma^2 increases on [0, sigma] and decreases after.
  return std::abs(gaussian_derivative(std::clamp(sigma_, lo, hi)));
}

double CutGaussian1D::gaussian_integral(double lo, double hi) const {
  const double s = std::sqrt(2.0) * sigma_;
  return c_ * sigma_ * std::sqrt(std::numbers::pi / 2) * (std::erf(hi / s) - std::erf(lo / s));
}

double CutGaussian1D::eval(double t) const { return std::abs(t) <= a_ ? gaussian(t) : 0.0; }

double CutGaussian1D::derivative(double t) const { return std::abs(t) <= a_ ? gaussian_derivative(t) : 0.0; }

double CutGaussian1D::second_derivative(double t) const {
  if (std::abs(t) > a_) return 0;
  const double s2 = sigma_ * sigma_;
  return (t * t / (s2 * s2) - 1 / s2) * gaussian(t);
}

double CutGaussian1D::lipschitz() const { return gaussian_derivative_bound(0, a_); }

// |g''| = |t^2/sigma^2 - 1| e^{-t^2/2sigma^2} C / sigma^2 <= C / sigma^2.
double CutGaussian1D::curvature_bound() const { return c_ / (sigma_ * sigma_); }

double CutGaussian1D::derivative_bound(double lo, double hi) const {
  double near = (lo <= 0 && 0 <= hi) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
  double far = std::min(std::max(std::abs(lo), std::abs(hi)), a_);
  if (near > a_) return 0;
  return gaussian_derivative_bound(near, far);
}

// ---------------------------------------------------------------------------
// TriangularGaussianKernel1D

TriangularGaussianKernel1D::TriangularGaussianKernel1D(double sigma, double cutoff)
    : TriangularGaussianKernel1D(sigma, cutoff, 1 / (std::sqrt(2 * std::numbers::pi) * sigma)) {}

TriangularGaussianKernel1D::TriangularGaussianKernel1D(double sigma, double cutoff, double scale)
    : sigma_(sigma), a_(cutoff), c_(scale), breaks_{-2 * cutoff, 0.0, 2 * cutoff} {
  require_positive(sigma, "Gaussian sigma");
  require_positive(cutoff, "Gaussian cut-off");
  require_positive(scale, "Gaussian scale");
}

double TriangularGaussianKernel1D::eval(double t) const {
  const double tri = 2 * a_ - std::abs(t);
  if (tri <= 0) return 0;
  return tri * c_ * std::exp(-t * t / (2 * sigma_ * sigma_));
}

double TriangularGaussianKernel1D::derivative(double t) const {
  const double u = std::abs(t);
  if (u >= 2 * a_ || t == 0) return 0;
  const double s2 = sigma_ * sigma_;
  const double g = c_ * std::exp(-u * u / (2 * s2));
  return sign(t) * (-g - (2 * a_ - u) * u / s2 * g);
}

double TriangularGaussianKernel1D::second_derivative(double t) const {
  const double u = std::abs(t);
  if (u >= 2 * a_) return 0;
  const double s2 = sigma_ * sigma_;
  const double g = c_ * std::exp(-u * u / (2 * s2));
  const double dg = -u / s2 * g;
  const double d2g = (u * u / (s2 * s2) - 1 / s2) * g;
  return -2 * dg + (2 * a_ - u) * d2g;
}

// |rho'| = g (1 + (2a - u) u / sigma^2) <= C (1 + a^2 / sigma^2).
double TriangularGaussianKernel1D::lipschitz() const { return c_ * (1 + a_ * a_ / (sigma_ * sigma_)); }

double TriangularGaussianKernel1D::curvature_bound() const {
  return 2 * c_ * std::exp(-0.5) / sigma_ + 2 * a_ * c_ / (sigma_ * sigma_);
}

// ---------------------------------------------------------------------------
// BoxConvolvedFastSpread

BoxConvolvedFastSpread::BoxConvolvedFastSpread(double sensor_half_width, FastSpread1D spread)
    : b_(sensor_half_width), spread_(spread) {
  require_positive(sensor_half_width, "sensor half-width");
}

double BoxConvolvedFastSpread::eval(double t) const {
  t = std::abs(t);
  if (std::abs(t) >= half_width()) return 0;
  return spread_.antiderivative(t + b_) - spread_.antiderivative(t - b_);
}

double BoxConvolvedFastSpread::derivative(double t) const { return spread_.eval(t + b_) - spread_.eval(t - b_); }

double BoxConvolvedFastSpread::second_derivative(double t) const {
  return spread_.derivative(t + b_) - spread_.derivative(t - b_);
}

double BoxConvolvedFastSpread::lipschitz() const {
  return std::min(spread_.eval(0), 2 * b_ * spread_.lipschitz());
}

double BoxConvolvedFastSpread::curvature_bound() const {
  return std::min(2 * spread_.lipschitz(), 2 * b_ * spread_.curvature_bound());
}

// ---------------------------------------------------------------------------
// BoxConvolvedCutGaussian

BoxConvolvedCutGaussian::BoxConvolvedCutGaussian(double sensor_half_width, CutGaussian1D spread)
    : b_(sensor_half_width),
      spread_(spread),
      breaks_{-spread.cutoff() - sensor_half_width, -spread.cutoff() + sensor_half_width,
              spread.cutoff() - sensor_half_width, spread.cutoff() + sensor_half_width} {
  require_positive(sensor_half_width, "sensor half-width");
}

double BoxConvolvedCutGaussian::eval(double t) const {
  t = std::abs(t);
  const double a = spread_.cutoff();
  const double lo = std::max(t - b_, -a), hi = std::min(t + b_, a);
  if (lo >= hi) return 0;
  return spread_.gaussian_integral(lo, hi);
}

double BoxConvolvedCutGaussian::derivative(double t) const {
  const double a = spread_.cutoff();
  if (std::max(t - b_, -a) >= std::min(t + b_, a)) return 0;
  double d = 0;
  if (t + b_ < a) d += spread_.gaussian(t + b_);
  if (t - b_ > -a) d -= spread_.gaussian(t - b_);
  return d;
}

double BoxConvolvedCutGaussian::second_derivative(double t) const {
  const double a = spread_.cutoff();
  if (std::max(t - b_, -a) >= std::min(t + b_, a)) return 0;
  double d = 0;
  if (t + b_ < a) d += spread_.gaussian_derivative(t + b_);
  if (t - b_ > -a) d -= spread_.gaussian_derivative(t - b_);
  return d;
}

// Both window ends inside the cut-off: a difference of Gaussian values 2b
// apart. Only one end inside: that end lies within 2b of the cut-off.
double BoxConvolvedCutGaussian::lipschitz() const {
  const double a = spread_.cutoff();
  const double edge = std::max(a - 2 * b_, 0.0);
  return std::max(2 * b_ * spread_.gaussian_derivative_bound(0, a), spread_.gaussian(edge));
}

double BoxConvolvedCutGaussian::curvature_bound() const {
  const double a = spread_.cutoff();
  const double edge = std::max(a - 2 * b_, 0.0);
  return std::max(2 * b_ * spread_.curvature_bound(), spread_.gaussian_derivative_bound(edge, a));
}

// ---------------------------------------------------------------------------
// ProductKernel

ProductKernel::ProductKernel(std::vector<std::shared_ptr<const Kernel1D>> factors) : factors_(std::move(factors)) {
  if (factors_.empty() || static_cast<int>(factors_.size()) > kMaxDim)
    throw std::invalid_argument("ProductKernel: unsupported number of factors");
  for (const auto& f : factors_)
    if (!f) throw std::invalid_argument("ProductKernel: null factor");
}

std::shared_ptr<const ProductKernel> ProductKernel::uniform(std::shared_ptr<const Kernel1D> factor, int dim) {
  return std::make_shared<const ProductKernel>(std::vector<std::shared_ptr<const Kernel1D>>(dim, factor));
}

double ProductKernel::eval(const Point& x) const {
  double v = 1;
  for (int i = 0; i < dim(); ++i) {
    v *= factors_[i]->eval(x[i]);
    if (v == 0) return 0;
  }
  return v;
}

Cube ProductKernel::support() const {
  Point lo(dim()), hi(dim());
  for (int i = 0; i < dim(); ++i) {
    hi[i] = factors_[i]->half_width();
    lo[i] = -hi[i];
  }
  return {lo, hi};
}

Interval ProductKernel::bounds(const Cube& c) const {
  // Factors are non-negative, so the product of ranges is the range.
  Interval r{1, 1};
  for (int i = 0; i < dim(); ++i) {
    const Interval f = factors_[i]->bounds(c.lower(i), c.upper(i));
    r = {r.lo * f.lo, r.hi * f.hi};
  }
  return r;
}

double ProductKernel::lipschitz() const {
  double s = 0;
  for (int i = 0; i < dim(); ++i) {
    double t = factors_[i]->lipschitz();
    for (int j = 0; j < dim(); ++j)
      if (j != i) t *= factors_[j]->eval(0.0);
    s += t * t;
  }
  return std::sqrt(s);
}

LocalModel ProductKernel::local_model(const Cube& c) const {
  const int d = dim();
  std::array<double, kMaxDim> v{}, dv{}, d2v{}, sup{}, sup_d1{}, sup_d2{};
  LocalModel model;
  model.dim = d;
  model.smooth = true;
  for (int i = 0; i < d; ++i) {
    const Kernel1D& f = *factors_[i];
    const double lo = c.lower(i), hi = c.upper(i);
    const double m = 0.5 * (lo + hi);
    v[i] = f.eval(m);
    dv[i] = f.derivative(m);
    d2v[i] = f.second_derivative(m);
    sup[i] = f.bounds(lo, hi).hi;
    sup_d1[i] = f.derivative_bound(lo, hi);
    sup_d2[i] = f.curvature_bound();
    model.smooth = model.smooth && f.smooth_on(lo, hi);
  }
  auto product_except = [&](const std::array<double, kMaxDim>& vals, int i, int j) {
    double p = 1;
    for (int k = 0; k < d; ++k)
      if (k != i && k != j) p *= vals[k];
    return p;
  };
  model.value = product_except(v, -1, -1);
  for (int i = 0; i < d; ++i) {
    model.gradient[i] = dv[i] * product_except(v, i, -1);
    for (int j = 0; j < d; ++j) {
      if (i == j) {
        model.h(i, i) = d2v[i] * product_except(v, i, -1);
        model.hb(i, i) = sup_d2[i] * product_except(sup, i, -1);
      } else {
        model.h(i, j) = dv[i] * dv[j] * product_except(v, i, j);
        model.hb(i, j) = sup_d1[i] * sup_d1[j] * product_except(sup, i, j);
      }
    }
  }
  return model;
}

}  // namespace pointsource
