#include "sqe/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sqe/channels.hpp"
#include "sqe/error.hpp"

namespace sqe {

using nlohmann::json;

namespace {

const std::set<std::string> kTableKeys{"restarts", "seed", "max_iter", "threads", "heuristic",
                                       "tolerance"};
const std::set<std::string> kNoiseKeys{"mu_step", "margin"};
const std::set<std::string> kLossKeys{"pair", "resolution"};
const std::set<std::string> kGhzKeys{"truncation", "points", "s2_min", "s2_max", "modes",
                                     "r_list", "lambdas", "renormalize"};

std::set<std::string> allowed_keys(const std::string& scenario) {
  if (scenario == "table") return kTableKeys;
  if (scenario == "noise") {
    auto keys = kTableKeys;
    keys.insert(kNoiseKeys.begin(), kNoiseKeys.end());
    return keys;
  }
  if (scenario == "loss") return kLossKeys;
  if (scenario == "ghz") return kGhzKeys;
  fail(ErrorKind::kInvalidArgument, "unknown scenario '" + scenario + "'");
}

void check_keys(const ScenarioConfig& config) {
  const auto allowed = allowed_keys(config.scenario);
  require(config.parameters.is_object(), ErrorKind::kInvalidArgument,
          "'parameters' must be an object");
  for (const auto& [key, value] : config.parameters.items())
    require(allowed.count(key) == 1, ErrorKind::kInvalidArgument,
            "unknown parameter '" + key + "' for scenario '" + config.scenario + "'");
}

const json* find(const ScenarioConfig& c, const char* key) {
  const auto it = c.parameters.find(key);
  return it == c.parameters.end() ? nullptr : &*it;
}

[[noreturn]] void bad(const char* key, const std::string& what) {
  fail(ErrorKind::kInvalidArgument, std::string("parameter '") + key + "' " + what);
}

long long get_int(const ScenarioConfig& c, const char* key, long long fallback, long long lo,
                  long long hi) {
  const json* v = find(c, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad(key, "must be an integer");
  const long long x = v->get<long long>();
  if (x < lo || x > hi)
    bad(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

double get_double(const ScenarioConfig& c, const char* key, double fallback, double lo,
                  double hi) {
  const json* v = find(c, key);
  if (!v) return fallback;
  if (!v->is_number()) bad(key, "must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x) || x < lo || x > hi) bad(key, "is out of range");
  return x;
}

bool get_bool(const ScenarioConfig& c, const char* key, bool fallback) {
  const json* v = find(c, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad(key, "must be true or false");
  return v->get<bool>();
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

Vector qubit(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

PureState cluster_state() {
  const double h = 1.0 / std::sqrt(2.0);
  const Vector zero = qubit(1, 0), one = qubit(0, 1), plus = qubit(h, h), minus = qubit(h, -h);
  const std::vector<std::vector<Vector>> terms{{plus, zero, plus, zero},
                                               {plus, zero, minus, one},
                                               {minus, one, minus, zero},
                                               {minus, one, plus, one}};
  Vector psi = Vector::Zero(16);
  for (const auto& t : terms) psi += 0.5 * kron_all(t);
  return PureState(SystemShape({2, 2, 2, 2}), psi);
}

HermitianOperator cluster_projector() {
  const Vector psi = cluster_state().amplitudes();
  return HermitianOperator(SystemShape({2, 2, 2, 2}), psi * psi.adjoint());
}

std::vector<Partition> cluster_partitions() {
  std::vector<Partition> out;
  for (auto& p : enumerate_partitions(4))
    if (p.party_count() >= 2) out.push_back(std::move(p));
  return out;
}

ScenarioConfig ScenarioConfig::parse(const json& j) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items())
    require(key == "scenario" || key == "parameters", ErrorKind::kInvalidArgument,
            "unknown config field '" + key + "'");
  require(j.contains("scenario") && j.at("scenario").is_string(), ErrorKind::kInvalidArgument,
          "config needs a 'scenario' name");
  ScenarioConfig c;
  c.scenario = j.at("scenario").get<std::string>();
  if (j.contains("parameters")) c.parameters = j.at("parameters");
  check_keys(c);
  if (c.scenario == "table") (void)table_params(c);
  if (c.scenario == "noise") (void)noise_params(c), (void)table_params(c);
  if (c.scenario == "loss") (void)loss_params(c);
  if (c.scenario == "ghz") (void)ghz_params(c);
  return c;
}

ScenarioConfig ScenarioConfig::defaults(const std::string& scenario) {
  (void)allowed_keys(scenario);
  return ScenarioConfig{scenario, json::object()};
}

TableParams table_params(const ScenarioConfig& c) {
  check_keys(c);
  TableParams p;
  p.restarts = static_cast<int>(get_int(c, "restarts", p.restarts, 1, 4096));
  const json* seed = find(c, "seed");
  if (seed) {
    if (!seed->is_number_unsigned()) bad("seed", "must be a nonnegative integer");
    p.seed = seed->get<std::uint64_t>();
  }
  p.max_iter = static_cast<int>(get_int(c, "max_iter", p.max_iter, 1, 1000000));
  p.threads = static_cast<unsigned>(get_int(c, "threads", p.threads, 0, 1024));
  p.heuristic = get_bool(c, "heuristic", p.heuristic);
  p.tolerance = get_double(c, "tolerance", p.tolerance, 0.0, 1.0);
  return p;
}

NoiseParams noise_params(const ScenarioConfig& c) {
  check_keys(c);
  NoiseParams p;
  p.mu_step = get_double(c, "mu_step", p.mu_step, 1e-7, 0.5);
  p.margin = get_double(c, "margin", p.margin, 0.0, 1e-3);
  return p;
}

LossParams loss_params(const ScenarioConfig& c) {
  check_keys(c);
  LossParams p;
  if (const json* pair = find(c, "pair")) {
    if (!pair->is_array() || pair->size() != 2 || !(*pair)[0].is_number_integer() ||
        !(*pair)[1].is_number_integer())
      bad("pair", "must be two one-based subsystem indices");
    p.a = (*pair)[0].get<int>();
    p.b = (*pair)[1].get<int>();
    if (p.a < 1 || p.a > 4 || p.b < 1 || p.b > 4 || p.a == p.b)
      bad("pair", "must name two distinct subsystems among 1..4");
  }
  p.resolution = static_cast<int>(get_int(c, "resolution", p.resolution, 2, 2001));
  return p;
}

GhzParams ghz_params(const ScenarioConfig& c) {
  check_keys(c);
  GhzParams p;
  p.truncation = static_cast<int>(get_int(c, "truncation", p.truncation, 1, 1000));
  p.points = static_cast<int>(get_int(c, "points", p.points, 2, 1000000));
  p.s2_min = get_double(c, "s2_min", p.s2_min, 1e-300, 1e6);
  p.s2_max = get_double(c, "s2_max", p.s2_max, 1e-300, 1e6);
  if (!(p.s2_max > p.s2_min)) bad("s2_max", "must exceed s2_min");
  p.modes = static_cast<int>(get_int(c, "modes", p.modes, 1, 100000));
  if (const json* rs = find(c, "r_list")) {
    if (!rs->is_array() || rs->empty()) bad("r_list", "must be a nonempty list of ranks");
    p.r_list.clear();
    for (const auto& r : *rs) {
      if (!r.is_number_integer() || r.get<long long>() < 1 || r.get<long long>() > 100000)
        bad("r_list", "entries must be integers >= 1");
      p.r_list.push_back(r.get<int>());
    }
  }
  if (const json* ls = find(c, "lambdas")) {
    if (ls->is_string()) {
      if (ls->get<std::string>() != "geometric") bad("lambdas", "must be \"geometric\" or a list");
    } else {
      if (!ls->is_array() || ls->empty()) bad("lambdas", "must be \"geometric\" or a list");
      std::vector<double> values;
      for (const auto& l : *ls) {
        if (!l.is_number() || !std::isfinite(l.get<double>()))
          bad("lambdas", "entries must be finite numbers");
        values.push_back(l.get<double>());
      }
      p.lambdas = std::move(values);
      p.truncation = static_cast<int>(p.lambdas->size());
    }
  }
  p.renormalize = get_bool(c, "renormalize", p.renormalize);
  return p;
}

ClusterTableResult run_cluster_table(const TableParams& params) {
  GRTableOptions options;
  options.solver.restarts = params.restarts;
  options.solver.seed = params.seed;
  options.solver.max_iter = params.max_iter;
  options.solver.threads = params.threads;
  options.solver.use_heuristic = params.heuristic;
  options.cross_check_tol = params.tolerance;
  ClusterTableResult out;
  out.table = build_gr_table(cluster_projector(), cluster_partitions(), options);
  for (const auto& [key, entry] : out.table.entries)
    if (!entry.exact)
      fail(ErrorKind::kNumericalInconsistency,
           "no closed form resolved " + key.first.label() + " r=" + std::to_string(key.second));
  out.text = render_table_text(out.table);
  return out;
}

NoiseResult run_white_noise(const NoiseParams& params, const GRTable& table) {
  const PureState psi = cluster_state();
  const HermitianOperator op = cluster_projector();
  require(table.operator_hash == operator_hash(op), ErrorKind::kInvalidArgument,
          "table was not built for the cluster projector");
  const DensityOperator rho = DensityOperator::from_pure(psi);
  const double v0 = expectation(op, psi);
  const double mixed = op.trace() / static_cast<double>(op.shape().total_dim());

  struct Cell {
    Partition p;
    int r;
    double g;
  };
  std::vector<Cell> cells;
  for (const auto& p : table.partitions())
    for (int r = 1; r <= table.max_r(p); ++r)
      if (const auto& e = table.at(p, r); e.exact) cells.push_back({p, r, e.g});
  const auto cuts = two_block_coarsenings(Partition::singletons(4));

  NoiseResult out;
  const long long steps = std::llround(1.0 / params.mu_step);
  require(std::abs(static_cast<double>(steps) * params.mu_step - 1.0) < 1e-9,
          ErrorKind::kInvalidArgument, "mu_step must divide 1");
  std::vector<std::vector<bool>> certified(steps + 1);
  for (long long k = 0; k <= steps; ++k) {
    const double mu = std::min(1.0, static_cast<double>(k) * params.mu_step);
    NoisePoint pt;
    pt.mu = mu;
    pt.value = expectation(op, white_noise(rho, mu));
    out.linearity_error =
        std::max(out.linearity_error, std::abs(pt.value - (mu * mixed + (1.0 - mu) * v0)));
    for (const auto& c : cells) {
      const bool ok = pt.value > c.g + params.margin;
      certified[k].push_back(ok);
      pt.certified_cells += ok;
    }
    pt.genuine = true;
    for (const auto& cut : cuts) {
      const auto it = table.entries.find({cut, 1});
      pt.genuine = pt.genuine && it != table.entries.end() && it->second.exact &&
                   pt.value > it->second.g + params.margin;
    }
    out.points.push_back(pt);
  }

  auto bracket = [&](NoiseThreshold& t, auto&& is_certified) {
    t.last_certified = -1.0;
    t.first_uncertified = 2.0;
    for (std::size_t k = 0; k < out.points.size(); ++k) {
      if (is_certified(k))
        t.last_certified = std::max(t.last_certified, out.points[k].mu);
      else
        t.first_uncertified = std::min(t.first_uncertified, out.points[k].mu);
    }
    t.confirmed = t.first_uncertified - t.last_certified <= params.mu_step * (1.0 + 1e-9) &&
                  t.last_certified < t.analytic && t.analytic <= t.first_uncertified + 1e-12;
  };

  const double slope = v0 - mixed;
  out.genuine.analytic = 2.0;
  out.partial.analytic = -1.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].g >= v0 - 1e-12) continue;
    NoiseThreshold t{cells[i].p, cells[i].r, cells[i].g, (v0 - cells[i].g) / slope, 0, 0, false};
    bracket(t, [&](std::size_t k) { return certified[k][i]; });
    out.thresholds.push_back(t);
    if (t.analytic > out.partial.analytic) {
      out.partial.partition = t.partition;
      out.partial.r = t.r;
      out.partial.g = t.g;
      out.partial.analytic = t.analytic;
    }
    const bool is_cut = cells[i].r == 1 &&
                        std::find(cuts.begin(), cuts.end(), cells[i].p) != cuts.end();
    if (is_cut && t.analytic < out.genuine.analytic) {
      out.genuine.partition = t.partition;
      out.genuine.r = 1;
      out.genuine.g = t.g;
      out.genuine.analytic = t.analytic;
    }
  }
  bracket(out.genuine, [&](std::size_t k) { return out.points[k].genuine; });
  bracket(out.partial, [&](std::size_t k) { return out.points[k].certified_cells > 0; });
  return out;
}

std::optional<double> loss_formula(int a, int b, double t_a, double t_b) {
  if (a > b) {
    std::swap(a, b);
    std::swap(t_a, t_b);
  }
  if (a == 2 && b == 4) return (1 + t_a) * (1 + t_a) * (1 + t_b) * (1 + t_b) / 16.0;
  if (a == 1 && b == 2)
    return ((1 + t_a) * (1 + t_a) * (1 + t_b) * (1 + t_b) +
            (1 - t_a * t_a) * (1 - t_b) * (1 - t_b)) /
           16.0;
  return std::nullopt;
}

double loss_value(int a, int b, double t_a, double t_b) {
  static const PureState psi = cluster_state();
  static const HermitianOperator op = cluster_projector();
  DensityOperator rho = DensityOperator::from_pure(psi);
  rho = amplitude_loss(rho, a - 1, t_a);
  rho = amplitude_loss(rho, b - 1, t_b);
  return expectation(op, rho);
}

LossResult run_loss_grid(const LossParams& params, const std::vector<double>& levels) {
  require(params.a != params.b && params.a >= 1 && params.b >= 1 && params.a <= 4 &&
              params.b <= 4,
          ErrorKind::kInvalidArgument, "loss pair must name two distinct subsystems 1..4");
  require(params.resolution >= 2, ErrorKind::kInvalidArgument, "resolution must be at least 2");
  LossResult out;
  out.a = params.a;
  out.b = params.b;
  out.resolution = params.resolution;
  const int n = params.resolution;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = static_cast<double>(i) / (n - 1);
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LossPoint pt{grid[i], grid[j], loss_value(params.a, params.b, grid[i], grid[j]),
                   loss_formula(params.a, params.b, grid[i], grid[j])};
      if (pt.analytic) {
        const double d = std::abs(pt.value - *pt.analytic);
        out.max_discrepancy = std::max(out.max_discrepancy.value_or(0.0), d);
      }
      values[static_cast<std::size_t>(i) * n + j] = pt.value;
      out.points.push_back(pt);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.max_asymmetry = std::max(out.max_asymmetry,
                                   std::abs(values[static_cast<std::size_t>(i) * n + j] -
                                            values[static_cast<std::size_t>(j) * n + i]));
  if (out.max_discrepancy && *out.max_discrepancy > 1e-10)
    fail(ErrorKind::kNumericalInconsistency,
         "Kraus evaluation disagrees with the closed-form loss expectation by " +
             num(*out.max_discrepancy));
  for (double level : levels) {
    LossLevel l{level, 0};
    for (double v : values) l.points_above += v > level;
    out.levels.push_back(l);
  }
  return out;
}

std::optional<double> ghz_crossing(const std::vector<double>& lambdas, double level,
                                   bool renormalize) {
  auto value = [&](double s2) { return ghz_witness_value(lambdas, s2, renormalize).value; };
  if (!(value(0.0) > level)) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (value(hi) >= level) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) return std::nullopt;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) >= level)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ghz_dense_value(const std::vector<double>& lambdas, int modes, double sigma_sq_total) {
  const PureState psi = ghz_state(lambdas, modes);
  DensityOperator rho = DensityOperator::from_pure(psi);
  for (int q = 0; q < modes; ++q)
    rho = local_phase_diffusion(rho, q, sigma_sq_total / modes);
  const HermitianOperator op(psi.shape(), psi.amplitudes() * psi.amplitudes().adjoint());
  return expectation(op, rho);
}

GhzResult run_ghz_curve(const GhzParams& params) {
  const std::vector<double> lambdas =
      params.lambdas ? *params.lambdas : geometric_lambdas(params.truncation);
  GhzResult out;
  out.truncation = static_cast<int>(lambdas.size());
  out.modes = params.modes;
  out.tail_bound = ghz_witness_value(lambdas, 0.0, params.renormalize).tail_bound;
  const double ratio = params.s2_max / params.s2_min;
  for (int k = 0; k < params.points; ++k) {
    const double s2 = params.s2_min * std::pow(ratio, static_cast<double>(k) / (params.points - 1));
    const std::vector<double> local(params.modes, s2 / params.modes);
    const double total = DephasingSpec::from_local(local).sigma_sq_total;
    out.points.push_back({s2, ghz_witness_value(lambdas, total, params.renormalize).value});
  }
  for (int r : params.r_list) {
    GhzLevel l;
    l.r = r;
    l.g = ghz_level(lambdas, r);
    l.crossing = ghz_crossing(lambdas, l.g, params.renormalize);
    out.levels.push_back(l);
  }
  out.levels.push_back(GhzLevel{std::nullopt, 1.0, std::nullopt});

  const std::vector<double> small(lambdas.begin(),
                                  lambdas.begin() + std::min<std::size_t>(6, lambdas.size()));
  double norm = 0.0;
  for (double l : small) norm += l * l;
  std::vector<double> unit = small;
  for (double& l : unit) l /= std::sqrt(norm);
  for (double s2 : {0.0, 1e-3, 0.1, 1.0, 10.0}) {
    const double series = ghz_witness_value(unit, s2).value;
    const double compact =
        ghz_expectation(fock_dephase(ghz_coefficients(unit), DephasingSpec(s2)), unit);
    const double dense = ghz_dense_value(unit, 3, s2);
    out.dense_discrepancy = std::max(
        {out.dense_discrepancy, std::abs(series - dense), std::abs(compact - dense)});
  }
  if (out.dense_discrepancy > 1e-10)
    fail(ErrorKind::kNumericalInconsistency,
         "compact and dense dephasing paths disagree by " + num(out.dense_discrepancy));
  return out;
}

std::string noise_csv(const NoiseResult& result) {
  std::string out = "mu,value\n";
  for (const auto& p : result.points) out += num(p.mu) + "," + num(p.value) + "\n";
  return out;
}

std::string loss_csv(const LossResult& result) {
  std::string out = "t_a,t_b,value\n";
  for (const auto& p : result.points)
    out += num(p.t_a) + "," + num(p.t_b) + "," + num(p.value) + "\n";
  return out;
}

std::string ghz_csv(const GhzResult& result) {
  std::string out = "sigma_sq,value\n";
  for (const auto& p : result.points) out += num(p.sigma_sq) + "," + num(p.value) + "\n";
  return out;
}

std::string table_csv(const GRTable& table) {
  std::string out = "partition,r,g,method,exact\n";
  for (const auto& p : table.partitions())
    for (int r = 1; r <= table.max_r(p); ++r) {
      const auto& e = table.at(p, r);
      out += p.label() + "," + std::to_string(r) + "," + num(e.g) + "," +
             std::string(to_string(e.method)) + "," + (e.exact ? "true" : "false") + "\n";
    }
  return out;
}

namespace {

json threshold_json(const NoiseThreshold& t) {
  return {{"partition", t.partition.label()}, {"r", t.r},
          {"g", t.g},                         {"analytic", t.analytic},
          {"last_certified", t.last_certified}, {"first_uncertified", t.first_uncertified},
          {"confirmed", t.confirmed}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const NoiseResult& result) {
  json points = json::array(), thresholds = json::array();
  for (const auto& p : result.points)
    points.push_back({{"mu", p.mu},
                      {"value", p.value},
                      {"certified_cells", p.certified_cells},
                      {"genuine", p.genuine}});
  for (const auto& t : result.thresholds) thresholds.push_back(threshold_json(t));
  return {{"thresholds", thresholds},
          {"genuine_threshold", threshold_json(result.genuine)},
          {"partial_threshold", threshold_json(result.partial)},
          {"linearity_error", result.linearity_error},
          {"points", points}};
}

json to_json(const LossResult& result) {
  json points = json::array(), levels = json::array();
  for (const auto& p : result.points)
    points.push_back({{"t_a", p.t_a}, {"t_b", p.t_b}, {"value", p.value},
                      {"analytic", optional_json(p.analytic)}});
  for (const auto& l : result.levels) levels.push_back({{"g", l.g}, {"points_above", l.points_above}});
  return {{"pair", {result.a, result.b}},
          {"resolution", result.resolution},
          {"max_discrepancy", optional_json(result.max_discrepancy)},
          {"max_asymmetry", result.max_asymmetry},
          {"levels", levels},
          {"points", points}};
}

json to_json(const GhzResult& result) {
  json points = json::array(), levels = json::array();
  for (const auto& p : result.points) points.push_back({{"sigma_sq", p.sigma_sq}, {"value", p.value}});
  for (const auto& l : result.levels)
    levels.push_back({{"r", l.r ? json(*l.r) : json("inf")},
                      {"g", l.g},
                      {"crossing", optional_json(l.crossing)}});
  return {{"truncation", result.truncation},
          {"modes", result.modes},
          {"tail_bound", result.tail_bound},
          {"dense_discrepancy", result.dense_discrepancy},
          {"levels", levels},
          {"points", points}};
}

std::string noise_text(const NoiseResult& result) {
  std::ostringstream out;
  auto line = [&](const char* name, const NoiseThreshold& t) {
    out << name << " mu < " << format_decimal(t.analytic) << "  (grid: certified up to "
        << format_decimal(t.last_certified) << ", " << (t.confirmed ? "confirmed" : "NOT confirmed")
        << ")\n";
  };
  line("genuine multipartite:", result.genuine);
  line("any SQE certified:   ", result.partial);
  for (const auto& t : result.thresholds)
    out << "P_" << display_label(t.partition) << " r=" << t.r << "  g=" << format_decimal(t.g)
        << "  mu < " << format_decimal(t.analytic) << (t.confirmed ? "" : "  NOT confirmed") << '\n';
  return out.str();
}

std::string loss_text(const LossResult& result) {
  std::ostringstream out;
  out << "losses on subsystems " << result.a << " and " << result.b << ", " << result.resolution
      << "x" << result.resolution << " grid\n";
  if (result.max_discrepancy)
    out << "max |Kraus - closed form| = " << num(*result.max_discrepancy) << '\n';
  out << "max asymmetry under t_a <-> t_b = " << num(result.max_asymmetry) << '\n';
  for (const auto& l : result.levels)
    out << "points above g = " << format_decimal(l.g) << ": " << l.points_above << '\n';
  return out.str();
}

std::string ghz_text(const GhzResult& result) {
  std::ostringstream out;
  out << "truncation d = " << result.truncation << ", modes N = " << result.modes
      << ", tail bound " << num(result.tail_bound) << '\n';
  for (const auto& l : result.levels) {
    out << "r = " << (l.r ? std::to_string(*l.r) : std::string("inf")) << "  g = "
        << format_decimal(l.g);
    if (l.crossing) out << "  crossing at |sigma|^2 = " << format_decimal(*l.crossing);
    out << '\n';
  }
  return out.str();
}

}  // namespace sqe
