#include "pointsource/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pointsource {

using nlohmann::json;

namespace {

constexpr double kTruthFractions[4] = {0.15, 0.40, 0.65, 0.85};
constexpr double kTruthWeights[4] = {2, 4, 7, 9};

SensorGridOperator make_operator(const ExperimentSpec& spec) {
  return SensorGridOperator(spec.domain, spec.sensors_per_axis, spec.sensor_fraction, spec.spread);
}

std::string family_name(SpreadFamily f) { return f == SpreadFamily::fast ? "fast" : "cut_gaussian"; }

SpreadFamily parse_family(const std::string& s) {
  if (s == "fast") return SpreadFamily::fast;
  if (s == "cut_gaussian" || s == "cut-gaussian") return SpreadFamily::cut_gaussian;
  throw std::invalid_argument("unknown spread family '" + s + "'");
}

std::string data_term_name(DataTerm d) { return d == DataTerm::l1 ? "l1" : "l2sq"; }

DataTerm parse_data_term(const std::string& s) {
  if (s == "l2sq" || s == "l2_squared") return DataTerm::l2_squared;
  if (s == "l1") return DataTerm::l1;
  throw std::invalid_argument("unknown data term '" + s + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ExperimentSpec ExperimentSpec::defaults(int dimension, SpreadFamily family, DataTerm data_term) {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("experiment: dimension must be 1 or 2");
  ExperimentSpec s;
  s.dimension = dimension;
  s.domain = dimension == 1 ? Cube::unit(1) : Cube::unit(2, 2.0);
  s.sensors_per_axis = dimension == 1 ? 100 : 16;
  s.sensor_fraction = 0.4;
  s.spread = family == SpreadFamily::fast ? SpreadParams::fast(0.16) : SpreadParams::cut_gaussian(0.05, 0.05, 0.15);
  s.data_term = data_term;
  if (data_term == DataTerm::l1) {
    s.noise = {NoiseKind::salt_pepper, 0.0, 0.6, 0.4};
    s.alpha = 0.1;
  } else {
    const bool fast = family == SpreadFamily::fast;
    s.noise = {NoiseKind::gaussian, dimension == 1 ? 0.2 : (fast ? 0.15 : 0.1), 0.6, 0.4};
    s.alpha = dimension == 1 ? (fast ? 0.06 : 0.09) : (fast ? 0.12 : 0.19);
  }
  s.ground_truth = default_ground_truth(s);
  return s;
}

double expected_noise_energy(const NoiseSpec& noise, std::size_t sensors) {
  const auto n = static_cast<double>(sensors);
  if (noise.kind == NoiseKind::gaussian) return n * noise.sd * noise.sd;
  return n * noise.probability * noise.magnitude * noise.magnitude;
}

DiscreteMeasure default_ground_truth(const ExperimentSpec& spec, double target_ssnr_db) {
  const int d = spec.domain.dim();
  DiscreteMeasure unit;
  for (int i = 0; i < 4; ++i) {
    Point x(d);
    for (int a = 0; a < d; ++a) {
      const double f = kTruthFractions[a == 0 ? i : 3 - i];
      x[a] = spec.domain.lower(a) + f * spec.domain.width(a);
    }
    unit.add(kTruthWeights[i], x);
  }
  const SensorGridOperator A = make_operator(spec);
  const std::vector<double> clean = A.apply(unit);
  double energy = 0;
  for (double v : clean) energy += v * v;
  const double noise = expected_noise_energy(spec.noise, A.num_sensors());
  if (!(energy > 0) || !(noise > 0)) return unit;
  const double scale = std::sqrt(std::pow(10.0, target_ssnr_db / 10) * noise / energy);
  for (auto& s : unit.spikes()) s.weight *= scale;
  return unit;
}

double NoiseSource::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double NoiseSource::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

ExperimentData generate_data(const ExperimentSpec& spec) { return generate_data(spec, make_operator(spec)); }

ExperimentData generate_data(const ExperimentSpec& spec, const SensorGridOperator& A) {
  for (const auto& s : spec.ground_truth.spikes())
    if (!spec.domain.contains(s.location)) throw std::invalid_argument("ground truth spike outside the domain");
  const std::vector<double> clean = A.apply(spec.ground_truth);
  ExperimentData data;
  data.clean = Eigen::Map<const Eigen::VectorXd>(clean.data(), static_cast<Eigen::Index>(clean.size()));
  data.noisy = data.clean;
  NoiseSource rng(spec.seed);
  const NoiseSpec& n = spec.noise;
  for (Eigen::Index i = 0; i < data.noisy.size(); ++i) {
    if (n.kind == NoiseKind::gaussian) {
      data.noisy[i] += n.sd * rng.normal();
    } else {
      const double u = rng.uniform();
      if (u < n.probability / 2)
        data.noisy[i] -= n.magnitude;
      else if (u < n.probability)
        data.noisy[i] += n.magnitude;
    }
  }
  return data;
}

double ssnr_db(const ExperimentData& data) {
  return 10 * std::log10(data.clean.squaredNorm() / (data.noisy - data.clean).squaredNorm());
}

Problem make_problem(const ExperimentSpec& spec, const Eigen::VectorXd& b, int jobs) {
  auto A = std::make_shared<SensorGridOperator>(make_operator(spec));
  A->set_jobs(jobs);
  Problem p;
  p.A = A;
  p.D = std::make_shared<const ParticleToWaveOperator>(
      ProductKernel::uniform(make_wave_kernel(spec.spread), spec.domain.dim()));
  if (static_cast<std::size_t>(b.size()) != A->num_sensors())
    throw std::invalid_argument("experiment: data size does not match the sensor count");
  p.b = b;
  p.alpha = spec.alpha;
  p.data_term = spec.data_term;
  p.L = estimate_smoothness(spec.spread, A->sensor_half_width(), spec.domain.dim()).L;
  return p;
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "fb") return Algorithm::fb;
  if (name == "fista") return Algorithm::fista;
  if (name == "pdps") return Algorithm::pdps;
  if (name == "fw-relaxed") return Algorithm::fw_relaxed;
  if (name == "fw-fully-corrective") return Algorithm::fw_fully_corrective;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::fb: return "fb";
    case Algorithm::fista: return "fista";
    case Algorithm::pdps: return "pdps";
    case Algorithm::fw_relaxed: return "fw-relaxed";
    case Algorithm::fw_fully_corrective: return "fw-fully-corrective";
  }
  return "unknown";
}

void validate(const ExperimentSpec& spec, Algorithm algorithm) {
  if (spec.dimension != spec.domain.dim()) throw std::invalid_argument("experiment: domain dimension mismatch");
  if (spec.dimension < 1 || spec.dimension > 2) throw std::invalid_argument("experiment: dimension must be 1 or 2");
  if (!(spec.alpha > 0)) throw std::invalid_argument("experiment: alpha must be positive");
  if (spec.sensors_per_axis < 1) throw std::invalid_argument("experiment: need at least one sensor per axis");
  if (spec.data_term == DataTerm::l1 && algorithm != Algorithm::pdps)
    throw std::invalid_argument("experiment: the l1 data term is only supported by pdps");
  if (spec.spread.family == SpreadFamily::cut_gaussian && spec.spread.sigma < spec.spread.kernel_sigma)
    throw std::invalid_argument("experiment: spread sigma must be at least the kernel sigma");
}

SolverResult run_solver(const Problem& p, Algorithm algorithm, const SolverConfig& cfg) {
  switch (algorithm) {
    case Algorithm::fb: return run_mu_fb(p, cfg);
    case Algorithm::fista: return run_mu_fista(p, cfg);
    case Algorithm::pdps: return run_mu_pdps(p, cfg);
    case Algorithm::fw_relaxed: return run_fw(p, cfg, FwVariant::relaxed);
    case Algorithm::fw_fully_corrective: return run_fw(p, cfg, FwVariant::fully_corrective);
  }
  throw std::invalid_argument("unknown algorithm");
}

ExperimentResult run_experiment(const ExperimentSpec& spec, Algorithm algorithm, const SolverConfig& cfg, int jobs) {
  validate(spec, algorithm);
  ExperimentResult out;
  out.data = generate_data(spec);
  const Problem p = make_problem(spec, out.data.noisy, jobs);
  out.solver = run_solver(p, algorithm, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, const ExperimentSpec& s) {
  j = json{{"dimension", s.dimension},
           {"domain", {{"lower", s.domain.lower().to_vector()}, {"upper", s.domain.upper().to_vector()}}},
           {"sensors_per_axis", s.sensors_per_axis},
           {"sensor_fraction", s.sensor_fraction},
           {"spread",
            {{"family", family_name(s.spread.family)},
             {"sigma", s.spread.sigma},
             {"kernel_sigma", s.spread.kernel_sigma},
             {"cutoff", s.spread.cutoff}}},
           {"alpha", s.alpha},
           {"data_term", data_term_name(s.data_term)},
           {"ground_truth", s.ground_truth},
           {"seed", s.seed}};
  if (s.noise.kind == NoiseKind::gaussian)
    j["noise"] = {{"kind", "gaussian"}, {"sd", s.noise.sd}};
  else
    j["noise"] = {{"kind", "salt_pepper"}, {"magnitude", s.noise.magnitude}, {"probability", s.noise.probability}};
}

void update_from_json(const json& j, ExperimentSpec& s) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  if (j.contains("dimension")) s.dimension = j.at("dimension").get<int>();
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    s.domain = Cube(Point::from_vector(d.at("lower").get<std::vector<double>>()),
                    Point::from_vector(d.at("upper").get<std::vector<double>>()));
  }
  if (j.contains("sensors_per_axis")) s.sensors_per_axis = j.at("sensors_per_axis").get<int>();
  if (j.contains("sensor_fraction")) s.sensor_fraction = j.at("sensor_fraction").get<double>();
  if (j.contains("spread")) {
    const auto& sp = j.at("spread");
    if (sp.contains("family")) s.spread.family = parse_family(sp.at("family").get<std::string>());
    if (sp.contains("sigma")) s.spread.sigma = sp.at("sigma").get<double>();
    if (sp.contains("kernel_sigma")) s.spread.kernel_sigma = sp.at("kernel_sigma").get<double>();
    if (sp.contains("cutoff")) s.spread.cutoff = sp.at("cutoff").get<double>();
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    if (n.contains("kind")) {
      const auto kind = n.at("kind").get<std::string>();
      if (kind == "gaussian")
        s.noise.kind = NoiseKind::gaussian;
      else if (kind == "salt_pepper" || kind == "salt-pepper")
        s.noise.kind = NoiseKind::salt_pepper;
      else
        throw std::invalid_argument("unknown noise kind '" + kind + "'");
    }
    if (n.contains("sd")) s.noise.sd = n.at("sd").get<double>();
    if (n.contains("magnitude")) s.noise.magnitude = n.at("magnitude").get<double>();
    if (n.contains("probability")) s.noise.probability = n.at("probability").get<double>();
  }
  if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
  if (j.contains("data_term")) s.data_term = parse_data_term(j.at("data_term").get<std::string>());
  if (j.contains("ground_truth")) s.ground_truth = j.at("ground_truth").get<DiscreteMeasure>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const SolverConfig& c) {
  j = json{{"tau", c.tau},
           {"sigma", c.sigma},
           {"kappa", c.kappa},
           {"schedule", {{"c", c.schedule.c}, {"theta", c.schedule.theta}, {"p", c.schedule.p}}},
           {"max_outer", c.max_outer},
           {"bootstrap_insertions", c.bootstrap_insertions},
           {"tightened", c.tightened},
           {"inner_method", c.inner.method == InnerMethod::semismooth_newton ? "ssn" : "fb"},
           {"inner_max_iterations", c.inner.max_iterations},
           {"merge_radius", c.merge_radius},
           {"merge_final", c.merge_final},
           {"max_spikes", c.max_spikes},
           {"certify", c.certify},
           {"post_values", c.post_values}};
  if (c.acceleration)
    j["acceleration"] = *c.acceleration == Acceleration::none ? "none" : "strongly_convex_dual";
}

void update_from_json(const json& j, SolverConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("solver config must be a JSON object");
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
  if (j.contains("kappa")) c.kappa = j.at("kappa").get<double>();
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("c")) c.schedule.c = s.at("c").get<double>();
    if (s.contains("theta")) c.schedule.theta = s.at("theta").get<double>();
    if (s.contains("p")) c.schedule.p = s.at("p").get<double>();
  }
  if (j.contains("max_outer")) c.max_outer = j.at("max_outer").get<int>();
  if (j.contains("bootstrap_insertions")) c.bootstrap_insertions = j.at("bootstrap_insertions").get<int>();
  if (j.contains("tightened")) c.tightened = j.at("tightened").get<bool>();
  if (j.contains("inner_method")) {
    const auto m = j.at("inner_method").get<std::string>();
    if (m == "ssn")
      c.inner.method = InnerMethod::semismooth_newton;
    else if (m == "fb")
      c.inner.method = InnerMethod::forward_backward;
    else
      throw std::invalid_argument("unknown inner method '" + m + "'");
  }
  if (j.contains("inner_max_iterations")) c.inner.max_iterations = j.at("inner_max_iterations").get<int>();
  if (j.contains("merge_radius")) c.merge_radius = j.at("merge_radius").get<double>();
  if (j.contains("merge_final")) c.merge_final = j.at("merge_final").get<bool>();
  if (j.contains("max_spikes")) c.max_spikes = j.at("max_spikes").get<std::size_t>();
  if (j.contains("certify")) c.certify = j.at("certify").get<bool>();
  if (j.contains("post_values")) c.post_values = j.at("post_values").get<bool>();
  if (j.contains("acceleration")) {
    const auto a = j.at("acceleration").get<std::string>();
    if (a == "none")
      c.acceleration = Acceleration::none;
    else if (a == "strongly_convex_dual")
      c.acceleration = Acceleration::strongly_convex_dual;
    else
      throw std::invalid_argument("unknown acceleration '" + a + "'");
  }
}

void to_json(json& j, const RecordRow& r) {
  j = json{{"iter", r.iter},
           {"cpu_time_s", r.cpu_time_s},
           {"value", r.value},
           {"post_value", optional_number(r.post_value)},
           {"spike_count", r.spike_count},
           {"inner_iters", r.inner_iters},
           {"merges", r.merges}};
}

void from_json(const json& j, RecordRow& r) {
  r.iter = j.at("iter").get<int>();
  r.cpu_time_s = j.at("cpu_time_s").get<double>();
  r.value = j.at("value").get<double>();
  const auto& pv = j.at("post_value");
  r.post_value = pv.is_null() ? std::nullopt : std::optional<double>(pv.get<double>());
  r.spike_count = j.at("spike_count").get<std::size_t>();
  r.inner_iters = j.at("inner_iters").get<double>();
  r.merges = j.at("merges").get<int>();
}

void to_json(json& j, const RunRecord& rec) {
  j = json{{"rows", rec.rows}, {"inner_converged", rec.inner_converged}};
  json certs = json::array();
  for (const auto& c : rec.certifications)
    certs.push_back({{"iter", c.iter},
                     {"epsilon", c.epsilon},
                     {"min_value", c.min_value},
                     {"max_on_support", c.max_on_support},
                     {"capped", c.capped},
                     {"passed", c.passed}});
  j["certifications"] = std::move(certs);
}

void from_json(const json& j, RunRecord& rec) {
  rec = RunRecord{};
  rec.rows = j.at("rows").get<std::vector<RecordRow>>();
  if (j.contains("inner_converged")) rec.inner_converged = j.at("inner_converged").get<bool>();
  if (j.contains("certifications")) {
    for (const auto& c : j.at("certifications")) {
      Certification x;
      x.iter = c.at("iter").get<int>();
      x.epsilon = c.at("epsilon").get<double>();
      x.min_value = c.at("min_value").get<double>();
      x.max_on_support = c.at("max_on_support").get<double>();
      x.capped = c.at("capped").get<bool>();
      x.passed = c.at("passed").get<bool>();
      rec.certifications.push_back(x);
    }
  }
}

void write_record_csv(std::ostream& os, const RunRecord& record) {
  os << "iter,cpu_time_s,value,post_value,spike_count,inner_iters,merges\n";
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  for (const auto& r : record.rows) {
    os << r.iter << ',' << r.cpu_time_s << ',' << r.value << ',';
    if (r.post_value) os << *r.post_value;
    os << ',' << r.spike_count << ',' << r.inner_iters << ',' << r.merges << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

void export_run(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("record.csv");
    write_record_csv(f, result.solver.record);
  }
  {
    auto f = open("record.json");
    f << json(result.solver.record).dump(2) << '\n';
  }
  {
    auto f = open("measure.json");
    f << json(result.solver.mu).dump(2) << '\n';
  }
  {
    auto f = open("data.json");
    const auto& d = result.data;
    json j{{"clean", std::vector<double>(d.clean.data(), d.clean.data() + d.clean.size())},
           {"noisy", std::vector<double>(d.noisy.data(), d.noisy.data() + d.noisy.size())},
           {"ssnr_db", ssnr_db(d)}};
    f << j.dump(2) << '\n';
  }
}

}  // namespace pointsource
