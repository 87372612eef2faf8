#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqe/sqe_solver.hpp"
#include "sqe/tensor.hpp"
#include "sqe/witness.hpp"

namespace sqe {

/// (|+,0,+,0> + |+,0,-,1> + |-,1,-,0> + |-,1,+,1>) / 2.
PureState cluster_state();
HermitianOperator cluster_projector();
/// The 14 partitions of four subsystems with at least two parties.
std::vector<Partition> cluster_partitions();

/// A scenario name with its parameters; unknown keys and out-of-range values
/// are rejected when parsing.
struct ScenarioConfig {
  std::string scenario;
  nlohmann::json parameters = nlohmann::json::object();

  static ScenarioConfig parse(const nlohmann::json& j);
  static ScenarioConfig defaults(const std::string& scenario);
};

struct TableParams {
  int restarts = 32;
  std::uint64_t seed = 20140101;
  int max_iter = 500;
  unsigned threads = 0;
  bool heuristic = true;
  double tolerance = 1e-8;
};

struct NoiseParams {
  double mu_step = 1e-4;
  double margin = kDefaultCertificationMargin;
};

struct LossParams {
  int a = 2, b = 4;  ///< one-based subsystems
  int resolution = 101;
};

struct GhzParams {
  int truncation = 40;
  int points = 200;
  double s2_min = 1e-3;
  double s2_max = 1e2;
  int modes = 100;
  std::vector<int> r_list{1, 2, 3, 4};
  std::optional<std::vector<double>> lambdas;  ///< geometric when absent
  bool renormalize = true;
};

TableParams table_params(const ScenarioConfig& config);
NoiseParams noise_params(const ScenarioConfig& config);
LossParams loss_params(const ScenarioConfig& config);
GhzParams ghz_params(const ScenarioConfig& config);

struct ClusterTableResult {
  GRTable table;
  std::string text;
};

/// Every cell by closed form, cross-checked against the alternating solver.
/// Throws numerical_inconsistency on any disagreement above the tolerance.
ClusterTableResult run_cluster_table(const TableParams& params);

struct NoiseThreshold {
  Partition partition;
  int r = 0;
  double g = 0.0;
  double analytic = 0.0;  ///< 16 (1 - g) / 15
  double last_certified = 0.0;
  double first_uncertified = 0.0;
  bool confirmed = false;
};

struct NoisePoint {
  double mu = 0.0;
  double value = 0.0;
  int certified_cells = 0;
  bool genuine = false;
};

struct NoiseResult {
  std::vector<NoisePoint> points;
  std::vector<NoiseThreshold> thresholds;
  NoiseThreshold genuine;  ///< every 2-block partition certified at r = 1
  NoiseThreshold partial;  ///< some cell certified
  double linearity_error = 0.0;
};

NoiseResult run_white_noise(const NoiseParams& params, const GRTable& table);

struct LossPoint {
  double t_a = 0.0, t_b = 0.0, value = 0.0;
  std::optional<double> analytic;
};

struct LossLevel {
  double g = 0.0;
  int points_above = 0;
};

struct LossResult {
  int a = 0, b = 0;
  int resolution = 0;
  std::vector<LossPoint> points;
  std::optional<double> max_discrepancy;
  double max_asymmetry = 0.0;
  std::vector<LossLevel> levels;
};

/// Closed-form expectation for the pairs (2,4) and (1,2), if available.
std::optional<double> loss_formula(int a, int b, double t_a, double t_b);
double loss_value(int a, int b, double t_a, double t_b);
LossResult run_loss_grid(const LossParams& params, const std::vector<double>& levels = {});

struct GhzPoint {
  double sigma_sq = 0.0;
  double value = 0.0;
};

struct GhzLevel {
  std::optional<int> r;  ///< empty for r = infinity
  double g = 0.0;
  std::optional<double> crossing;
};

struct GhzResult {
  int truncation = 0;
  int modes = 0;
  double tail_bound = 0.0;
  std::vector<GhzPoint> points;
  std::vector<GhzLevel> levels;
  double dense_discrepancy = 0.0;
};

/// Solves value(s2) = level by bisection on [0, s2_hi], tolerance 1e-10 in s2.
std::optional<double> ghz_crossing(const std::vector<double>& lambdas, double level,
                                   bool renormalize);
/// The witness value of the dephased state evaluated on the dense
/// representation, with the total variance split evenly over the modes.
double ghz_dense_value(const std::vector<double>& lambdas, int modes, double sigma_sq_total);
GhzResult run_ghz_curve(const GhzParams& params);

std::string noise_csv(const NoiseResult& result);
std::string loss_csv(const LossResult& result);
std::string ghz_csv(const GhzResult& result);
std::string table_csv(const GRTable& table);

nlohmann::json to_json(const NoiseResult& result);
nlohmann::json to_json(const LossResult& result);
nlohmann::json to_json(const GhzResult& result);

std::string noise_text(const NoiseResult& result);
std::string loss_text(const LossResult& result);
std::string ghz_text(const GhzResult& result);

}  // namespace sqe
