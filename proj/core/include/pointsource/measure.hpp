#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pointsource/geometry.hpp"

namespace pointsource {

struct Spike {
  double weight = 0;
  Point location;
};

/// Finite sum of weighted Dirac spikes. The empty list is the zero measure.
/// Spike order is significant: every operation here preserves it.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Spike> spikes) : spikes_(std::move(spikes)) {}

  const std::vector<Spike>& spikes() const { return spikes_; }
  std::vector<Spike>& spikes() { return spikes_; }
  std::size_t size() const { return spikes_.size(); }
  bool empty() const { return spikes_.empty(); }
  const Spike& operator[](std::size_t i) const { return spikes_[i]; }
  Spike& operator[](std::size_t i) { return spikes_[i]; }

  void add(double weight, const Point& location) { spikes_.push_back({weight, location}); }

  std::vector<double> weights() const;
  std::vector<Point> locations() const;

  /// Number of spikes with nonzero weight.
  std::size_t support_size() const;

  /// Linear combination `a * this + b * other`, matching spikes by exact
  /// location. Spikes of `this` keep their order; new locations of `other`
  /// follow in their own order.
  DiscreteMeasure combined(double a, const DiscreteMeasure& other, double b) const;

  friend bool operator==(const DiscreteMeasure& x, const DiscreteMeasure& y);

 private:
  std::vector<Spike> spikes_;
};

double radon_norm(const DiscreteMeasure& mu);

/// Removes spikes whose weight is exactly zero.
DiscreteMeasure prune(const DiscreteMeasure& mu);

using MergeAcceptor = std::function<bool(const DiscreteMeasure& candidate)>;

struct MergeResult {
  DiscreteMeasure measure;
  int merges = 0;
};

/// Greedy barycentric merging of spikes closer than `radius` in the
/// infinity norm. Pairs are scanned in index order; after every accepted
/// merge the scan restarts. The merged spike takes the slot of the earlier
/// spike of the pair. Pairs with zero total weight are skipped.
MergeResult merge_spikes(const DiscreteMeasure& mu, double radius, const MergeAcceptor& accept);

void to_json(nlohmann::json& j, const DiscreteMeasure& mu);
void from_json(const nlohmann::json& j, DiscreteMeasure& mu);

}  // namespace pointsource
