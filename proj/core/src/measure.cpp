#include "pointsource/measure.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pointsource {

std::vector<double> DiscreteMeasure::weights() const {
  std::vector<double> w;
  w.reserve(spikes_.size());
  for (const auto& s : spikes_) w.push_back(s.weight);
  return w;
}

std::vector<Point> DiscreteMeasure::locations() const {
  std::vector<Point> x;
  x.reserve(spikes_.size());
  for (const auto& s : spikes_) x.push_back(s.location);
  return x;
}

std::size_t DiscreteMeasure::support_size() const {
  std::size_t n = 0;
  for (const auto& s : spikes_) n += s.weight != 0;
  return n;
}

namespace {

// Exact-coordinate key; locations are copied, never recomputed, so bitwise
// equality is the right notion of "same spike".
std::vector<double> key_of(const Point& p) { return p.to_vector(); }

}  // namespace

DiscreteMeasure DiscreteMeasure::combined(double a, const DiscreteMeasure& other, double b) const {
  std::map<std::vector<double>, std::size_t> index;
  DiscreteMeasure out;
  out.spikes_.reserve(spikes_.size() + other.size());
  for (const auto& s : spikes_) {
    auto [it, inserted] = index.emplace(key_of(s.location), out.spikes_.size());
    if (inserted)
      out.spikes_.push_back({a * s.weight, s.location});
    else
      out.spikes_[it->second].weight += a * s.weight;
  }
  for (const auto& s : other.spikes_) {
    auto [it, inserted] = index.emplace(key_of(s.location), out.spikes_.size());
    if (inserted)
      out.spikes_.push_back({b * s.weight, s.location});
    else
      out.spikes_[it->second].weight += b * s.weight;
  }
  return out;
}

bool operator==(const DiscreteMeasure& x, const DiscreteMeasure& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i].weight != y[i].weight || !(x[i].location == y[i].location)) return false;
  return true;
}

double radon_norm(const DiscreteMeasure& mu) {
  double n = 0;
  for (const auto& s : mu.spikes()) n += std::abs(s.weight);
  return n;
}

DiscreteMeasure prune(const DiscreteMeasure& mu) {
  std::vector<Spike> kept;
  kept.reserve(mu.size());
  for (const auto& s : mu.spikes())
    if (s.weight != 0) kept.push_back(s);
  return DiscreteMeasure(std::move(kept));
}

MergeResult merge_spikes(const DiscreteMeasure& mu, double radius, const MergeAcceptor& accept) {
  if (radius < 0) throw std::invalid_argument("merge_spikes: negative radius");
  MergeResult result{mu, 0};
  auto& spikes = result.measure.spikes();
  bool restart = true;
  while (restart) {
    restart = false;
    for (std::size_t i = 0; i < spikes.size() && !restart; ++i) {
      for (std::size_t j = i + 1; j < spikes.size(); ++j) {
        const double wi = spikes[i].weight, wj = spikes[j].weight;
        const double total = wi + wj;
        if (total == 0) continue;
        if ((spikes[i].location - spikes[j].location).norm_inf() > radius) continue;
        Point centre = (wi / total) * spikes[i].location + (wj / total) * spikes[j].location;
        DiscreteMeasure candidate = result.measure;
        auto& cs = candidate.spikes();
        cs[i] = {total, centre};
        cs.erase(cs.begin() + static_cast<std::ptrdiff_t>(j));
        if (!accept || accept(candidate)) {
          result.measure = std::move(candidate);
          ++result.merges;
          restart = true;
          break;
        }
      }
    }
  }
  return result;
}

void to_json(nlohmann::json& j, const DiscreteMeasure& mu) {
  j = nlohmann::json::array();
  for (const auto& s : mu.spikes()) j.push_back({{"weight", s.weight}, {"location", s.location.to_vector()}});
}

void from_json(const nlohmann::json& j, DiscreteMeasure& mu) {
  if (!j.is_array()) throw std::invalid_argument("measure JSON must be an array of spikes");
  std::vector<Spike> spikes;
  for (const auto& e : j) {
    spikes.push_back({e.at("weight").get<double>(), Point::from_vector(e.at("location").get<std::vector<double>>())});
  }
  mu = DiscreteMeasure(std::move(spikes));
}

}  // namespace pointsource
