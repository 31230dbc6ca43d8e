#include "pointsource/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace pointsource {

std::shared_ptr<const Kernel1D> make_spread(const SpreadParams& p) {
  if (p.family == SpreadFamily::fast) return std::make_shared<const FastSpread1D>(p.sigma);
  return std::make_shared<const CutGaussian1D>(p.sigma, p.cutoff);
}

std::shared_ptr<const Kernel1D> make_wave_kernel(const SpreadParams& p) {
  if (p.family == SpreadFamily::fast) return std::make_shared<const FastSpread1D>(p.sigma);
  return std::make_shared<const TriangularGaussianKernel1D>(p.kernel_sigma, p.cutoff);
}

std::shared_ptr<const Kernel1D> make_sensor_kernel(const SpreadParams& p, double sensor_half_width) {
  if (p.family == SpreadFamily::fast)
    return std::make_shared<const BoxConvolvedFastSpread>(sensor_half_width, FastSpread1D(p.sigma));
  return std::make_shared<const BoxConvolvedCutGaussian>(sensor_half_width, CutGaussian1D(p.sigma, p.cutoff));
}

// ---------------------------------------------------------------------------
// SensorGridOperator

SensorGridOperator::SensorGridOperator(Cube domain, int sensors_per_axis, double sensor_fraction,
                                       SpreadParams spread)
    : domain_(std::move(domain)), n_(sensors_per_axis), spread_(spread) {
  if (n_ < 1) throw std::invalid_argument("SensorGridOperator: need at least one sensor per axis");
  if (!(sensor_fraction > 0 && sensor_fraction < 1))
    throw std::invalid_argument("SensorGridOperator: sensor fraction must lie in (0, 1)");
  double min_spacing = spacing(0);
  for (int i = 1; i < dim(); ++i) min_spacing = std::min(min_spacing, spacing(i));
  if (!(min_spacing > 0)) throw std::invalid_argument("SensorGridOperator: degenerate domain");
  b_ = sensor_fraction * min_spacing;

  sensor_1d_ = make_sensor_kernel(spread_, b_);
  sensor_kernel_ = ProductKernel::uniform(sensor_1d_, dim());
  spread_kernel_ = ProductKernel::uniform(make_spread(spread_), dim());

  std::size_t total = 1;
  for (int i = 0; i < dim(); ++i) total *= static_cast<std::size_t>(n_);
  sensors_.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point z(dim());
    std::size_t rest = idx;
    for (int i = 0; i < dim(); ++i) {
      const auto k = rest % static_cast<std::size_t>(n_);
      rest /= static_cast<std::size_t>(n_);
      z[i] = domain_.lower(i) + (static_cast<double>(k) + 0.5) * spacing(i);
    }
    sensors_.push_back(z);
  }
}

std::vector<std::pair<std::size_t, double>> SensorGridOperator::column(const Point& x) const {
  const int d = dim();
  const double r = sensor_1d_->half_width();
  std::array<int, kMaxDim> first{}, count{};
  std::array<std::vector<double>, kMaxDim> values;
  for (int i = 0; i < d; ++i) {
    const double s = spacing(i), lo = domain_.lower(i);
    const int j0 = std::max(0, static_cast<int>(std::ceil((x[i] - r - lo) / s - 0.5)));
    const int j1 = std::min(n_ - 1, static_cast<int>(std::floor((x[i] + r - lo) / s - 0.5)));
    first[i] = j0;
    count[i] = std::max(0, j1 - j0 + 1);
    if (count[i] == 0) return {};
    values[i].resize(static_cast<std::size_t>(count[i]));
    for (int j = 0; j < count[i]; ++j) {
      const double z = lo + (j0 + j + 0.5) * s;
      values[i][static_cast<std::size_t>(j)] = sensor_1d_->eval(x[i] - z);
    }
  }
  std::vector<std::pair<std::size_t, double>> col;
  std::array<int, kMaxDim> k{};
  while (true) {
    double v = 1;
    std::size_t idx = 0, stride = 1;
    for (int i = 0; i < d; ++i) {
      v *= values[i][static_cast<std::size_t>(k[i])];
      idx += static_cast<std::size_t>(first[i] + k[i]) * stride;
      stride *= static_cast<std::size_t>(n_);
    }
    if (v != 0) col.emplace_back(idx, v);
    int i = 0;
    while (i < d && ++k[i] == count[i]) k[i++] = 0;
    if (i == d) break;
  }
  return col;
}

void SensorGridOperator::accumulate(const Spike& s, std::vector<double>& out) const {
  if (s.weight == 0) return;
  for (const auto& [idx, v] : column(s.location)) out[idx] += s.weight * v;
}

std::vector<double> SensorGridOperator::apply(const DiscreteMeasure& mu) const {
  std::vector<double> out(num_sensors(), 0.0);
  const auto& spikes = mu.spikes();
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs_), spikes.size()));
  if (workers <= 1) {
    for (const auto& s : spikes) accumulate(s, out);
    return out;
  }
  // Contiguous spike chunks, partial sums added in chunk order.
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(workers), std::vector<double>(num_sensors(), 0.0));
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (spikes.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        const std::size_t begin = w * chunk, end = std::min(spikes.size(), begin + chunk);
        for (std::size_t i = begin; i < end; ++i) accumulate(spikes[i], partial[static_cast<std::size_t>(w)]);
      });
    }
  }
  for (const auto& p : partial)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  return out;
}

WeightedKernelSum SensorGridOperator::preadjoint(std::span<const double> y) const {
  if (y.size() != num_sensors()) throw std::invalid_argument("preadjoint: dimension mismatch");
  WeightedKernelSum sum(dim());
  for (std::size_t z = 0; z < y.size(); ++z)
    if (y[z] != 0) sum.add(y[z], sensors_[z], sensor_kernel_);
  return sum;
}

Eigen::MatrixXd SensorGridOperator::matrix(std::span<const Point> locations) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_sensors()),
                                            static_cast<Eigen::Index>(locations.size()));
  for (std::size_t j = 0; j < locations.size(); ++j)
    for (const auto& [idx, v] : column(locations[j]))
      m(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(j)) = v;
  return m;
}

// ---------------------------------------------------------------------------
// ParticleToWaveOperator

WeightedKernelSum ParticleToWaveOperator::apply(const DiscreteMeasure& mu, double scale) const {
  WeightedKernelSum sum(dim());
  for (const auto& s : mu.spikes()) sum.add(scale * s.weight, s.location, rho_);
  return sum;
}

double ParticleToWaveOperator::eval(const DiscreteMeasure& mu, const Point& x) const {
  double v = 0;
  for (const auto& s : mu.spikes()) v += s.weight * rho_->eval(x - s.location);
  return v;
}

Eigen::MatrixXd ParticleToWaveOperator::gram(std::span<const Point> locations) const {
  const auto n = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = rho_->eval(Point::filled(dim(), 0.0));
    for (Eigen::Index j = 0; j < i; ++j) {
      g(i, j) = g(j, i) = rho_->eval(locations[static_cast<std::size_t>(i)] - locations[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

double d_inner(const ParticleToWaveOperator& D, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  double s = 0;
  for (const auto& a : mu.spikes())
    for (const auto& b : nu.spikes()) s += a.weight * b.weight * D.kernel()->eval(a.location - b.location);
  return s;
}

// ---------------------------------------------------------------------------

SmoothnessConstants estimate_smoothness(const SpreadParams& spread, double sensor_half_width, int dim) {
  if (!(sensor_half_width > 0)) throw std::invalid_argument("estimate_smoothness: sensor half-width must be positive");
  if (dim < 1) throw std::invalid_argument("estimate_smoothness: bad dimension");
  double l1_axis = 1;
  if (spread.family == SpreadFamily::cut_gaussian) {
    // Hoelder gives F[psi]^2 <= C_u (chi^2 * u^)(xi), and
    // C_u u^ <= L1 v^ pointwise iff sigma_u >= sigma_v, with
    // L1 = C_u^2 sigma_u / (C_v sigma_v) for unit-mass scalings.
    if (spread.sigma < spread.kernel_sigma)
      throw std::invalid_argument("estimate_smoothness: spread Gaussian narrower than kernel Gaussian");
    const double cu = 1 / (std::sqrt(2 * std::numbers::pi) * spread.sigma);
    const double cv = 1 / (std::sqrt(2 * std::numbers::pi) * spread.kernel_sigma);
    l1_axis = cu * cu * spread.sigma / (cv * spread.kernel_sigma);
  }
  SmoothnessConstants c;
  c.L0 = std::pow(2 * sensor_half_width, dim);
  c.L1 = std::pow(l1_axis, dim);
  c.L = c.L0 * c.L1;
  return c;
}

}  // namespace pointsource
