#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pointsource/algorithms.hpp"

namespace pointsource {

enum class NoiseKind { gaussian, salt_pepper };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double sd = 0.2;
  double magnitude = 0.6;
  double probability = 0.4;
};

struct ExperimentSpec {
  int dimension = 1;
  Cube domain = Cube::unit(1);
  int sensors_per_axis = 100;
  double sensor_fraction = 0.4;
  SpreadParams spread;
  NoiseSpec noise;
  double alpha = 0.09;
  DataTerm data_term = DataTerm::l2_squared;
  DiscreteMeasure ground_truth;
  std::uint64_t seed = 0;

  /// The benchmark setups: [0,1] with 100 sensors or [0,2]^2 with 16x16,
  /// Gaussian noise for the squared data term and salt-and-pepper noise for
  /// the l1 data term. The ground truth is `default_ground_truth`.
  static ExperimentSpec defaults(int dimension, SpreadFamily family, DataTerm data_term);
};

/// Four spikes at fractions 0.15, 0.40, 0.65, 0.85 of the domain (on the
/// anti-diagonal in 2D) with weights proportional to 2, 4, 7, 9, scaled so
/// that the expected noise energy gives an SSNR of `target_ssnr_db`.
DiscreteMeasure default_ground_truth(const ExperimentSpec& spec, double target_ssnr_db = 4.3);

/// Expected squared noise norm over all sensors.
double expected_noise_energy(const NoiseSpec& noise, std::size_t sensors);

/// Seedable portable source: 64-bit Mersenne Twister with explicit
/// uniform and Box-Muller normal transforms, so sequences are identical
/// across standard libraries.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct ExperimentData {
  Eigen::VectorXd clean;
  Eigen::VectorXd noisy;
};

ExperimentData generate_data(const ExperimentSpec& spec);
ExperimentData generate_data(const ExperimentSpec& spec, const SensorGridOperator& A);

/// 10 log10(|clean|^2 / |noise|^2) in dB.
double ssnr_db(const ExperimentData& data);

Problem make_problem(const ExperimentSpec& spec, const Eigen::VectorXd& b, int jobs = 1);

enum class Algorithm { fb, fista, pdps, fw_relaxed, fw_fully_corrective };
Algorithm parse_algorithm(std::string_view name);
std::string algorithm_name(Algorithm a);

/// Throws std::invalid_argument for combinations no solver supports.
void validate(const ExperimentSpec& spec, Algorithm algorithm);

struct ExperimentResult {
  ExperimentData data;
  SolverResult solver;
};

SolverResult run_solver(const Problem& p, Algorithm algorithm, const SolverConfig& cfg);
ExperimentResult run_experiment(const ExperimentSpec& spec, Algorithm algorithm, const SolverConfig& cfg,
                                int jobs = 1);

// Serialisation ------------------------------------------------------------

void to_json(nlohmann::json& j, const ExperimentSpec& spec);
/// Fields absent from `j` keep the values already in `spec`.
void update_from_json(const nlohmann::json& j, ExperimentSpec& spec);
void to_json(nlohmann::json& j, const SolverConfig& cfg);
void update_from_json(const nlohmann::json& j, SolverConfig& cfg);

void to_json(nlohmann::json& j, const RecordRow& row);
void from_json(const nlohmann::json& j, RecordRow& row);
void to_json(nlohmann::json& j, const RunRecord& record);
void from_json(const nlohmann::json& j, RunRecord& record);

/// Header `iter,cpu_time_s,value,post_value,spike_count,inner_iters,merges`;
/// a missing post value is an empty field.
void write_record_csv(std::ostream& os, const RunRecord& record);

/// Writes record.csv, record.json, measure.json and data.json into `dir`.
void export_run(const std::filesystem::path& dir, const ExperimentResult& result);

}  // namespace pointsource
