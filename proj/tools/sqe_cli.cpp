#include <algorithm>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sqe/channels.hpp"
#include "sqe/error.hpp"
#include "sqe/io.hpp"
#include "sqe/scenarios.hpp"
#include "sqe/sqe_solver.hpp"
#include "sqe/witness.hpp"

namespace {

using sqe::io::json;

struct Common {
  std::string config;
  std::string out = "-";
  std::string format;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON scenario config")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output path ('-' for stdout)");
  cmd->add_option("--format", c.format, "csv, json or text")
      ->check(CLI::IsMember({"csv", "json", "text"}));
  cmd->add_option("--seed", c.seed, "root seed for solver restarts");
}

sqe::ScenarioConfig load_config(const std::string& scenario, const Common& c, json overrides) {
  sqe::ScenarioConfig config = sqe::ScenarioConfig::defaults(scenario);
  if (!c.config.empty()) {
    config = sqe::ScenarioConfig::parse(sqe::io::read_json_file(c.config));
    sqe::require(config.scenario == scenario, sqe::ErrorKind::kInvalidArgument,
                 "config is for scenario '" + config.scenario + "', not '" + scenario + "'");
  }
  for (auto& [key, value] : overrides.items()) config.parameters[key] = value;
  if (c.seed && (scenario == "table" || scenario == "noise")) config.parameters["seed"] = *c.seed;
  return sqe::ScenarioConfig::parse(json{{"scenario", scenario}, {"parameters", config.parameters}});
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void emit(const Common& c, const std::string& fallback, const std::string& csv, const json& j,
          const std::string& text) {
  const std::string format = c.format.empty() ? fallback : c.format;
  if (format == "csv") {
    sqe::require(!csv.empty(), sqe::ErrorKind::kInvalidArgument, "no CSV form for this output");
    sqe::io::write_text(c.out, csv);
  } else if (format == "json") {
    sqe::io::write_text(c.out, dump(j));
  } else {
    sqe::io::write_text(c.out, text);
  }
}

std::vector<double> table_levels(const sqe::GRTable& table) {
  std::vector<double> levels;
  for (const auto& [key, e] : table.entries)
    if (e.g < 1.0 - 1e-12) levels.push_back(e.g);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double a, double b) { return b - a <= 1e-12; }),
               levels.end());
  return levels;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural quantification of entanglement: g_r tables, witnesses and noise scans"};
  app.require_subcommand(1);

  Common table_c, noise_c, loss_c, ghz_c, solve_c, certify_c, export_c;

  auto* table = app.add_subcommand("table", "g_r for every partition of the 4-qubit cluster state");
  add_common(table, table_c);
  std::optional<int> table_restarts;
  table->add_option("--restarts", table_restarts, "alternating-solver restarts per cell");

  auto* noise = app.add_subcommand("noise", "white-noise certification thresholds");
  add_common(noise, noise_c);
  std::optional<double> mu_step;
  noise->add_option("--mu-step", mu_step, "grid step in mu");

  auto* loss = app.add_subcommand("loss", "expectation grid under local losses");
  add_common(loss, loss_c);
  std::optional<std::vector<int>> pair;
  std::optional<int> resolution;
  loss->add_option("--pair", pair, "two one-based subsystems")->expected(2)->delimiter(',');
  loss->add_option("--resolution", resolution, "grid points per axis");

  auto* ghz = app.add_subcommand("ghz", "dephased correlated-state witness curve");
  add_common(ghz, ghz_c);
  std::optional<int> truncation, points, modes;
  ghz->add_option("--truncation", truncation, "Fock truncation d");
  ghz->add_option("--points", points, "number of variance samples");
  ghz->add_option("--modes", modes, "number of modes N");

  auto* solve = app.add_subcommand("solve", "largest SQE eigenvalue of an operator");
  add_common(solve, solve_c);
  std::string op_path, partition_label;
  int rank = 1, restarts = 32, max_iter = 500;
  solve->add_option("--operator", op_path, "operator JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--partition", partition_label, "partition label, e.g. 1,3:2,4")->required();
  solve->add_option("--r", rank, "rank r")->check(CLI::PositiveNumber);
  solve->add_option("--restarts", restarts, "alternating-solver restarts")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", max_iter, "sweeps per restart")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify", "certify a state against a g_r table");
  add_common(certify, certify_c);
  std::string state_path, table_path, certify_op;
  double margin = sqe::kDefaultCertificationMargin;
  certify->add_option("--state", state_path, "state JSON")->required()->check(CLI::ExistingFile);
  certify->add_option("--grtable", table_path, "table JSON")->required()->check(CLI::ExistingFile);
  certify->add_option("--operator", certify_op, "test operator JSON (default: cluster projector)")
      ->check(CLI::ExistingFile);
  certify->add_option("--margin", margin, "certification margin")->check(CLI::NonNegativeNumber);

  auto* exporter = app.add_subcommand("export", "write a built-in state or operator as JSON");
  add_common(exporter, export_c);
  std::string what = "cluster-state";
  double mu = 0.0;
  exporter->add_option("--what", what, "cluster-state, cluster-projector or noisy-cluster")
      ->check(CLI::IsMember({"cluster-state", "cluster-projector", "noisy-cluster"}));
  exporter->add_option("--mu", mu, "white-noise fraction for noisy-cluster");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "invalid_argument"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }

  try {
    if (*table) {
      json o = json::object();
      if (table_restarts) o["restarts"] = *table_restarts;
      const auto params = sqe::table_params(load_config("table", table_c, o));
      const auto result = sqe::run_cluster_table(params);
      emit(table_c, "text", sqe::table_csv(result.table), sqe::io::to_json(result.table),
           result.text);
    } else if (*noise) {
      json o = json::object();
      if (mu_step) o["mu_step"] = *mu_step;
      const auto config = load_config("noise", noise_c, o);
      const auto table_result = sqe::run_cluster_table(sqe::table_params(config));
      const auto result = sqe::run_white_noise(sqe::noise_params(config), table_result.table);
      emit(noise_c, "csv", sqe::noise_csv(result), sqe::to_json(result), sqe::noise_text(result));
    } else if (*loss) {
      json o = json::object();
      if (pair) o["pair"] = *pair;
      if (resolution) o["resolution"] = *resolution;
      const auto params = sqe::loss_params(load_config("loss", loss_c, o));
      sqe::TableParams closed;
      closed.heuristic = false;
      const auto levels = table_levels(sqe::run_cluster_table(closed).table);
      const auto result = sqe::run_loss_grid(params, levels);
      emit(loss_c, "csv", sqe::loss_csv(result), sqe::to_json(result), sqe::loss_text(result));
    } else if (*ghz) {
      json o = json::object();
      if (truncation) o["truncation"] = *truncation;
      if (points) o["points"] = *points;
      if (modes) o["modes"] = *modes;
      const auto params = sqe::ghz_params(load_config("ghz", ghz_c, o));
      const auto result = sqe::run_ghz_curve(params);
      emit(ghz_c, "csv", sqe::ghz_csv(result), sqe::to_json(result), sqe::ghz_text(result));
    } else if (*solve) {
      const auto op = sqe::io::operator_from_json(sqe::io::read_json_file(op_path));
      const auto partition = sqe::Partition::parse(partition_label, op.shape().size());
      sqe::SolverOptions options;
      options.restarts = restarts;
      options.max_iter = max_iter;
      if (solve_c.seed) options.seed = *solve_c.seed;
      const auto result = sqe::g_r_max(op, partition, rank, options);
      json j = sqe::io::solution_to_json(result.solution);
      j["exact"] = result.exact;
      const std::string text = "P_" + sqe::display_label(partition) + " r=" +
                               std::to_string(rank) + "  g = " + sqe::format_decimal(result.g) +
                               (result.exact ? "  (exact)" : "  (lower bound)") + "\n";
      emit(solve_c, "json", "", j, text);
    } else if (*certify) {
      const auto rho = sqe::io::density_from_json(sqe::io::read_json_file(state_path));
      const auto table_json = sqe::io::read_json_file(table_path);
      const auto grtable = sqe::io::gr_table_from_json(table_json);
      const auto op = certify_op.empty()
                          ? sqe::cluster_projector()
                          : sqe::io::operator_from_json(sqe::io::read_json_file(certify_op));
      const auto report = sqe::sqe_report(rho, op, grtable, margin);
      emit(certify_c, "json", "", sqe::io::to_json(report), sqe::render_report_text(report));
    } else if (*exporter) {
      json j;
      if (what == "cluster-state")
        j = sqe::io::to_json(sqe::cluster_state());
      else if (what == "cluster-projector")
        j = sqe::io::to_json(sqe::cluster_projector());
      else
        j = sqe::io::to_json(
            sqe::white_noise(sqe::DensityOperator::from_pure(sqe::cluster_state()), mu));
      emit(export_c, "json", "", j, dump(j));
    }
  } catch (const sqe::Error& e) {
    std::cerr << sqe::io::error_to_json(e).dump() << '\n';
    const bool solver = e.kind() == sqe::ErrorKind::kSolverFailure ||
                        e.kind() == sqe::ErrorKind::kNumericalInconsistency;
    return solver ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
