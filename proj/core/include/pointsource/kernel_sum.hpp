#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "pointsource/kernels.hpp"

namespace pointsource {

/// zeta(x) = constant + sum_i w_i k_i(x - c_i) for compactly supported k_i.
///
/// Terms with the same kernel object and the same centre are merged on
/// insertion, so e.g. D(mu - mu_base) is represented with one term per
/// location rather than two opposing ones.
class WeightedKernelSum {
 public:
  struct Term {
    double weight = 0;
    Point centre;
    std::shared_ptr<const Kernel> kernel;
  };

  explicit WeightedKernelSum(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }

  /// Returns the index of the (possibly pre-existing) term.
  std::size_t add(double weight, const Point& centre, std::shared_ptr<const Kernel> kernel);
  void add_sum(const WeightedKernelSum& other, double scale = 1.0);
  void add_constant(double c) { constant_ += c; }

  double eval(const Point& x) const;
  /// Support of term i translated to its centre.
  Cube term_support(std::size_t i) const;
  /// Contribution bounds of term i over the cube.
  Interval term_bounds(std::size_t i, const Cube& c) const;
  /// Sum of per-term bounds plus the constant.
  Interval bounds(const Cube& c) const;
  double lipschitz() const;

 private:
  using Key = std::pair<const Kernel*, std::vector<double>>;

  int dim_;
  std::vector<Term> terms_;
  std::map<Key, std::size_t> index_;
  double constant_ = 0;
};

}  // namespace pointsource
