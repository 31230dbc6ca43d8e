#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pointsource/measure.hpp"

namespace testing {

/// Adaptive Gauss-Kronrod integral of f over [a, b], split at the given
/// interior points so that kinks and jumps sit on panel boundaries.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> breaks = {}) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
    if (hi <= lo) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-12);
  }
  return total;
}

/// |a - b| <= tol, inclusive so that exact zeros compare equal.
inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline pointsource::Point random_point(Rng& rng, int dim, double lo, double hi) {
  pointsource::Point p(dim);
  for (int i = 0; i < dim; ++i) p[i] = rng.uniform(lo, hi);
  return p;
}

inline pointsource::DiscreteMeasure random_measure(Rng& rng, int dim, int max_spikes, double lo, double hi,
                                                   double wlo, double whi) {
  pointsource::DiscreteMeasure mu;
  const int n = rng.integer(1, max_spikes);
  for (int i = 0; i < n; ++i) mu.add(rng.uniform(wlo, whi), random_point(rng, dim, lo, hi));
  return mu;
}

/// Grid of n^d points covering [lo, hi]^d, inclusive of the end points.
inline std::vector<pointsource::Point> grid(int dim, const pointsource::Cube& c, int n) {
  std::vector<pointsource::Point> pts;
  const int total = dim == 1 ? n : n * n;
  for (int k = 0; k < total; ++k) {
    pointsource::Point p(dim);
    int rest = k;
    for (int i = 0; i < dim; ++i) {
      const int j = rest % n;
      rest /= n;
      p[i] = n == 1 ? c.lower(i) : c.lower(i) + c.width(i) * j / (n - 1);
    }
    pts.push_back(p);
  }
  return pts;
}

}  // namespace testing
