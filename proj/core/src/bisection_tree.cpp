#include "pointsource/bisection_tree.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace pointsource {

namespace {

struct Entry {
  double upper;
  std::uint64_t seq;
  std::size_t node;
  bool marked;
};

struct EntryOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.upper != b.upper) return a.upper < b.upper;
    return a.seq > b.seq;
  }
};

}  // namespace

BisectionTree::BisectionTree(Cube domain, WeightedKernelSum sum) : sum_(std::move(sum)) {
  if (domain.dim() != sum_.dim()) throw std::invalid_argument("BisectionTree: dimension mismatch");
  Node root;
  root.cube = std::move(domain);
  nodes_.push_back(std::move(root));
  supports_.reserve(sum_.terms().size());
  for (std::size_t i = 0; i < sum_.terms().size(); ++i) {
    supports_.push_back(sum_.term_support(i));
    if (sum_.terms()[i].weight != 0 && term_meets(static_cast<std::uint32_t>(i), nodes_[0].cube))
      nodes_[0].terms.push_back(static_cast<std::uint32_t>(i));
  }
}

bool BisectionTree::term_meets(std::uint32_t term, const Cube& c) const { return supports_[term].intersects(c); }

void BisectionTree::register_term(std::size_t node, std::uint32_t term) {
  Node& n = nodes_[node];
  if (!term_meets(term, n.cube)) return;
  bool present = false;
  for (auto t : n.terms) present = present || t == term;
  if (!present) n.terms.push_back(term);
  n.bounds_valid = false;
  if (n.first_child >= 0) {
    const auto first = static_cast<std::size_t>(n.first_child);
    const unsigned count = n.cube.num_children();
    for (unsigned c = 0; c < count; ++c) register_term(first + c, term);
  }
}

std::size_t BisectionTree::insert_term(double weight, const Point& centre, std::shared_ptr<const Kernel> kernel) {
  const std::size_t before = sum_.terms().size();
  const std::size_t idx = sum_.add(weight, centre, std::move(kernel));
  if (idx == before) supports_.push_back(sum_.term_support(idx));
  if (sum_.terms()[idx].weight != 0 || idx != before) register_term(0, static_cast<std::uint32_t>(idx));
  return idx;
}

void BisectionTree::add_constant(double c) {
  sum_.add_constant(c);
  for (auto& n : nodes_) n.bounds_valid = false;
}

double BisectionTree::eval(const Point& x) const { return sum_.eval(x); }

double BisectionTree::eval_in(const Node& n, const Point& x) const {
  double v = sum_.constant();
  for (auto t : n.terms) {
    const auto& term = sum_.terms()[t];
    if (term.weight != 0) v += term.weight * term.kernel->eval(x - term.centre);
  }
  return v;
}

Interval BisectionTree::node_bounds(std::size_t index) {
  Node& n = nodes_[index];
  if (n.bounds_valid) return n.bounds;
  const int d = n.cube.dim();
  std::array<double, kMaxDim> half{};
  for (int i = 0; i < d; ++i) half[i] = 0.5 * n.cube.width(i);

  // Two enclosures, intersected: the sum of per-term ranges, and a
  // second-order Taylor bound about the midpoint over the terms that are
  // smooth on the cube (the rest contribute their ranges).
  Interval ranges{sum_.constant(), sum_.constant()};
  Interval rough{0, 0};
  double value = sum_.constant();
  std::array<double, kMaxDim> grad{};
  std::array<double, kMaxDim * kMaxDim> curv{};
  for (auto t : n.terms) {
    const auto& term = sum_.terms()[t];
    if (term.weight == 0) continue;
    const Cube rel = n.cube.translated(-1.0 * term.centre);
    const Interval r = term.kernel->bounds(rel).scaled(term.weight);
    ranges = ranges + r;
    const LocalModel m = term.kernel->local_model(rel);
    if (!m.smooth) {
      rough = rough + r;
      continue;
    }
    value += term.weight * m.value;
    for (int i = 0; i < d; ++i) {
      grad[i] += term.weight * m.gradient[i];
      for (int j = 0; j < d; ++j) curv[i * kMaxDim + j] += std::abs(term.weight) * m.hb(i, j);
    }
  }
  double radius = 0;
  for (int i = 0; i < d; ++i) {
    radius += std::abs(grad[i]) * half[i];
    for (int j = 0; j < d; ++j) radius += 0.5 * curv[i * kMaxDim + j] * half[i] * half[j];
  }
  const Interval taylor{value - radius + rough.lo, value + radius + rough.hi};
  n.bounds = {std::max(ranges.lo, taylor.lo), std::min(ranges.hi, taylor.hi)};
  n.bounds_valid = true;
  return n.bounds;
}

Interval BisectionTree::root_bounds() { return node_bounds(0); }

std::vector<std::size_t> BisectionTree::children(std::size_t index) {
  if (nodes_[index].first_child < 0) {
    const unsigned count = nodes_[index].cube.num_children();
    const auto first = nodes_.size();
    for (unsigned c = 0; c < count; ++c) {
      Node child;
      child.cube = nodes_[index].cube.child(c);
      child.depth = nodes_[index].depth + 1;
      for (auto t : nodes_[index].terms)
        if (term_meets(t, child.cube)) child.terms.push_back(t);
      nodes_.push_back(std::move(child));
    }
    nodes_[index].first_child = static_cast<std::int64_t>(first);
  }
  std::vector<std::size_t> out(nodes_[index].cube.num_children());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = static_cast<std::size_t>(nodes_[index].first_child) + c;
  return out;
}

Point BisectionTree::model_candidate(const Node& n, double sign) const {
  const int d = n.cube.dim();
  const Point mid = n.cube.midpoint();
  std::array<double, kMaxDim> grad{}, diag{};
  for (auto t : n.terms) {
    const auto& term = sum_.terms()[t];
    if (term.weight == 0) continue;
    const LocalModel m = term.kernel->local_model(n.cube.translated(-1.0 * term.centre));
    for (int i = 0; i < d; ++i) {
      grad[i] += term.weight * m.gradient[i];
      diag[i] += term.weight * m.h(i, i);
    }
  }
  Point x = mid;
  for (int i = 0; i < d; ++i) {
    const double g = sign * grad[i], h = sign * diag[i], half = 0.5 * n.cube.width(i);
    double step = 0;
    if (h < 0)
      step = std::clamp(-g / h, -half, half);
    else if (g != 0)
      step = g > 0 ? half : -half;
    x[i] = mid[i] + step;
  }
  return n.cube.clamp(x);
}

BnbResult BisectionTree::optimise(double sign, const BnbOptions& opts) {
  if (!(opts.tolerance > 0)) throw std::invalid_argument("branch-and-bound: tolerance must be positive");
  const double tol = opts.tolerance;
  const bool decide = opts.threshold.has_value();
  const double thr = decide ? sign * *opts.threshold : 0.0;

  BnbResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::size_t created = 0;

  // Returns the signed value of the best point probed in the node.
  auto probe = [&](std::size_t index) {
    const Node& n = nodes_[index];
    double local = -std::numeric_limits<double>::infinity();
    for (const Point& x : {model_candidate(n, sign), n.cube.midpoint()}) {
      const double v = sign * eval_in(n, x);
      ++best.evaluations;
      local = std::max(local, v);
      if (v > best.value) {
        best.value = v;
        best.point = x;
      }
    }
    return local;
  };
  auto signed_upper = [&](std::size_t index) {
    const Interval b = node_bounds(index);
    return sign > 0 ? b.hi : -b.lo;
  };

  std::priority_queue<Entry, std::vector<Entry>, EntryOrder> heap;
  std::uint64_t seq = 0;
  {
    const double local = probe(0);
    const double up = signed_upper(0);
    heap.push({up, seq++, 0, up - local <= 0.1 * tol});
  }

  while (!heap.empty()) {
    const Entry top = heap.top();
    const double gap = top.upper - best.value;
    if (decide) {
      if (top.upper <= thr + 0.1 * tol) break;
      if (best.value > thr && gap <= tol) break;
      if (gap <= 0.1 * tol) break;
    } else if (gap <= tol || top.marked) {
      break;
    }
    heap.pop();
    if (top.upper < best.value) continue;
    if (nodes_[top.node].depth >= opts.max_depth)
      throw BranchAndBoundError("branch-and-bound: depth cap reached with gap " + std::to_string(gap));
    for (std::size_t c : children(top.node)) {
      ++created;
      if (created > opts.max_nodes)
        throw BranchAndBoundError("branch-and-bound: node cap reached with gap " + std::to_string(gap));
      const double up = signed_upper(c);
      if (up < best.value) continue;
      const double local = probe(c);
      heap.push({up, seq++, c, up - local <= 0.1 * tol});
    }
  }

  const double top_upper = heap.empty() ? best.value : std::max(best.value, heap.top().upper);
  best.value = sign * best.value;
  best.bound = sign * top_upper;
  best.nodes = created + 1;
  return best;
}

BnbResult BisectionTree::maximise(const BnbOptions& opts) { return optimise(1.0, opts); }
BnbResult BisectionTree::minimise(const BnbOptions& opts) { return optimise(-1.0, opts); }

BnbResult maximise(const WeightedKernelSum& sum, const Cube& domain, const BnbOptions& opts) {
  return BisectionTree(domain, sum).maximise(opts);
}

BnbResult minimise(const WeightedKernelSum& sum, const Cube& domain, const BnbOptions& opts) {
  return BisectionTree(domain, sum).minimise(opts);
}

}  // namespace pointsource
