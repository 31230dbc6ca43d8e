#include "pointsource/kernel_sum.hpp"

#include <cmath>
#include <stdexcept>

namespace pointsource {

std::size_t WeightedKernelSum::add(double weight, const Point& centre, std::shared_ptr<const Kernel> kernel) {
  if (!kernel || kernel->dim() != dim_ || centre.dim() != dim_)
    throw std::invalid_argument("WeightedKernelSum: term dimension mismatch");
  auto [it, inserted] = index_.emplace(Key{kernel.get(), centre.to_vector()}, terms_.size());
  if (inserted)
    terms_.push_back({weight, centre, std::move(kernel)});
  else
    terms_[it->second].weight += weight;
  return it->second;
}

void WeightedKernelSum::add_sum(const WeightedKernelSum& other, double scale) {
  for (const auto& t : other.terms_) add(scale * t.weight, t.centre, t.kernel);
  constant_ += scale * other.constant_;
}

double WeightedKernelSum::eval(const Point& x) const {
  double v = constant_;
  for (const auto& t : terms_)
    if (t.weight != 0) v += t.weight * t.kernel->eval(x - t.centre);
  return v;
}

Cube WeightedKernelSum::term_support(std::size_t i) const {
  return terms_[i].kernel->support().translated(terms_[i].centre);
}

Interval WeightedKernelSum::term_bounds(std::size_t i, const Cube& c) const {
  const Term& t = terms_[i];
  if (t.weight == 0) return {0, 0};
  return t.kernel->bounds(c.translated(-1.0 * t.centre)).scaled(t.weight);
}

Interval WeightedKernelSum::bounds(const Cube& c) const {
  Interval b{constant_, constant_};
  for (std::size_t i = 0; i < terms_.size(); ++i) b = b + term_bounds(i, c);
  return b;
}

double WeightedKernelSum::lipschitz() const {
  double l = 0;
  for (const auto& t : terms_) l += std::abs(t.weight) * t.kernel->lipschitz();
  return l;
}

}  // namespace pointsource
