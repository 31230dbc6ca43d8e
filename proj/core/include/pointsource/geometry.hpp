#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace pointsource {

/// Largest spatial dimension a Point can hold. Everything downstream is
/// written for a runtime dimension `d <= kMaxDim`; d = 1 and d = 2 are the
/// exercised cases.
inline constexpr int kMaxDim = 3;

class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Point: unsupported dimension");
  }
  Point(std::initializer_list<double> coords) : Point(static_cast<int>(coords.size())) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }
  static Point filled(int dim, double value) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p.c_[i] = value;
    return p;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  double norm_inf() const {
    double m = 0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }
  double norm2() const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return std::sqrt(s);
  }

  std::vector<double> to_vector() const { return {c_.begin(), c_.begin() + dim_}; }
  static Point from_vector(const std::vector<double>& v) {
    Point p(static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), p.c_.begin());
    return p;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

/// Closed interval [lo, hi]; also used for (lower, upper) value bounds.
struct Interval {
  double lo = 0;
  double hi = 0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
  Interval scaled(double w) const { return w >= 0 ? Interval{w * lo, w * hi} : Interval{w * hi, w * lo}; }
};

/// Axis-aligned box `lower <= x <= upper`.
class Cube {
 public:
  Cube() = default;
  Cube(Point lower, Point upper) : lower_(lower), upper_(upper) {
    if (lower.dim() != upper.dim()) throw std::invalid_argument("Cube: corner dimension mismatch");
    for (int i = 0; i < lower.dim(); ++i)
      if (lower[i] > upper[i]) throw std::invalid_argument("Cube: lower corner exceeds upper corner");
  }
  static Cube unit(int dim, double side = 1.0) { return {Point::filled(dim, 0.0), Point::filled(dim, side)}; }
  static Cube at(const Point& p) { return {p, p}; }
  /// Symmetric box [-h, h]^d.
  static Cube centred(int dim, double half_width) {
    return {Point::filled(dim, -half_width), Point::filled(dim, half_width)};
  }

  int dim() const { return lower_.dim(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  double lower(int i) const { return lower_[i]; }
  double upper(int i) const { return upper_[i]; }
  Interval axis(int i) const { return {lower_[i], upper_[i]}; }

  Point midpoint() const {
    Point m(dim());
    for (int i = 0; i < dim(); ++i) m[i] = 0.5 * (lower_[i] + upper_[i]);
    return m;
  }
  double width(int i) const { return upper_[i] - lower_[i]; }
  double max_width() const {
    double w = 0;
    for (int i = 0; i < dim(); ++i) w = std::max(w, width(i));
    return w;
  }
  bool is_point() const { return max_width() == 0; }

  bool contains(const Point& p) const {
    for (int i = 0; i < dim(); ++i)
      if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
    return true;
  }
  bool contains(const Cube& c) const { return contains(c.lower_) && contains(c.upper_); }
  bool intersects(const Cube& c) const {
    for (int i = 0; i < dim(); ++i)
      if (c.upper_[i] < lower_[i] || c.lower_[i] > upper_[i]) return false;
    return true;
  }

  Cube translated(const Point& shift) const { return {lower_ + shift, upper_ + shift}; }
  Point clamp(const Point& p) const {
    Point q = p;
    for (int i = 0; i < dim(); ++i) q[i] = std::clamp(p[i], lower_[i], upper_[i]);
    return q;
  }

  /// Child `index` of the 2^d bisection; bit i of `index` selects the upper
  /// half along axis i.
  Cube child(unsigned index) const {
    Point lo = lower_, hi = upper_;
    const Point m = midpoint();
    for (int i = 0; i < dim(); ++i) {
      if (index & (1u << i))
        lo[i] = m[i];
      else
        hi[i] = m[i];
    }
    return {lo, hi};
  }
  unsigned num_children() const { return 1u << dim(); }

 private:
  Point lower_;
  Point upper_;
};

}  // namespace pointsource
