#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pointsource/kernel_sum.hpp"

namespace pointsource {

/// Raised when refinement exceeds the depth or node cap, which only happens
/// when the bounds are inconsistent with the function values.
class BranchAndBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BnbOptions {
  /// Returned value is within `tolerance` of the true optimum.
  double tolerance = 1e-3;
  int max_depth = 40;
  std::size_t max_nodes = 10'000'000;
  /// Decision mode for maximisation: stop as soon as the global upper bound
  /// is at most `threshold + tolerance / 10`, or a point above `threshold`
  /// has been located to within `tolerance`, or the gap falls below
  /// tolerance / 10. A returned value <= threshold therefore always comes
  /// with sup <= threshold + tolerance / 10. For minimisation the threshold
  /// is a lower bound and all inequalities flip.
  std::optional<double> threshold;
};

struct BnbResult {
  Point point;
  double value = 0;
  /// Upper bound on the supremum (lower bound on the infimum when
  /// minimising) at termination.
  double bound = 0;
  std::size_t nodes = 0;
  std::size_t evaluations = 0;
};

/// Lazily refined 2^d-ary bisection of a domain over a weighted kernel sum.
///
/// Each node keeps the indices of the terms whose support meets its cube, so
/// bounds and evaluations restricted to a node touch only nearby terms.
class BisectionTree {
 public:
  BisectionTree(Cube domain, WeightedKernelSum sum);

  const Cube& domain() const { return nodes_[0].cube; }
  const WeightedKernelSum& sum() const { return sum_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  std::size_t insert_term(double weight, const Point& centre, std::shared_ptr<const Kernel> kernel);
  void add_constant(double c);

  double eval(const Point& x) const;
  /// Conservative bounds of the sum over the root cube.
  Interval root_bounds();
  /// Bounds over the cube of node `index`.
  Interval node_bounds(std::size_t index);
  const Cube& node_cube(std::size_t index) const { return nodes_[index].cube; }
  /// Children of node `index`, creating them if needed.
  std::vector<std::size_t> children(std::size_t index);

  BnbResult maximise(const BnbOptions& opts);
  BnbResult minimise(const BnbOptions& opts);

 private:
  struct Node {
    Cube cube;
    int depth = 0;
    std::int64_t first_child = -1;
    std::vector<std::uint32_t> terms;
    Interval bounds;
    bool bounds_valid = false;
  };
  struct Candidate {
    Point point;
    double value;
  };

  void register_term(std::size_t node, std::uint32_t term);
  bool term_meets(std::uint32_t term, const Cube& c) const;
  double eval_in(const Node& n, const Point& x) const;
  /// Maximiser of the sign-adjusted per-axis quadratic model, clamped.
  Point model_candidate(const Node& n, double sign) const;
  BnbResult optimise(double sign, const BnbOptions& opts);

  WeightedKernelSum sum_;
  std::vector<Cube> supports_;
  std::vector<Node> nodes_;
};

/// One-shot convenience wrappers building a fresh tree.
BnbResult maximise(const WeightedKernelSum& sum, const Cube& domain, const BnbOptions& opts);
BnbResult minimise(const WeightedKernelSum& sum, const Cube& domain, const BnbOptions& opts);

}  // namespace pointsource
