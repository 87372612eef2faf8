#include "sqe/io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace sqe::io {

namespace {

json complex_array(const cplx* data, Index n) {
  json out = json::array();
  for (Index k = 0; k < n; ++k) out.push_back({data[k].real(), data[k].imag()});
  return out;
}

json matrix_json(const SystemShape& shape, const Matrix& m, const char* kind) {
  const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return {{"dims", shape.dims()}, {"kind", kind}, {"data", complex_array(rm.data(), rm.size())}};
}

template <typename T>
T field(const json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorKind::kInvalidArgument,
          std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("field '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, ErrorKind::kInvalidArgument, "unknown field '" + key + "'");
  }
}

Vector read_data(const json& j, Index expected) {
  const json& data = j.at("data");
  require(data.is_array(), ErrorKind::kInvalidArgument, "'data' must be an array");
  require(static_cast<Index>(data.size()) == expected, ErrorKind::kInvalidShape,
          "'data' has " + std::to_string(data.size()) + " entries, expected " +
              std::to_string(expected));
  Vector out(expected);
  for (Index k = 0; k < expected; ++k) {
    const json& e = data[k];
    double re = 0.0, im = 0.0;
    if (e.is_number()) {
      re = e.get<double>();
    } else {
      require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
              ErrorKind::kInvalidArgument, "entries must be numbers or [re, im] pairs");
      re = e[0].get<double>();
      im = e[1].get<double>();
    }
    require(std::isfinite(re) && std::isfinite(im), ErrorKind::kInvalidArgument,
            "non-finite entry in 'data'");
    out(k) = cplx(re, im);
  }
  return out;
}

struct Parsed {
  SystemShape shape;
  std::string kind;
  Vector values;
};

Parsed parse(const json& j) {
  check_keys(j, {"dims", "kind", "data"});
  SystemShape shape(field<std::vector<int>>(j, "dims"));
  const auto kind = field<std::string>(j, "kind");
  require(kind == "pure" || kind == "density" || kind == "hermitian", ErrorKind::kInvalidArgument,
          "unknown kind '" + kind + "'");
  const Index d = shape.total_dim();
  require(j.contains("data"), ErrorKind::kInvalidArgument, "missing field 'data'");
  return {shape, kind, read_data(j, kind == "pure" ? d : d * d)};
}

Matrix as_matrix(const Parsed& p) {
  const Index d = p.shape.total_dim();
  using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(p.values.data(), d, d);
}

}  // namespace

json to_json(const PureState& state) {
  const Vector& a = state.amplitudes();
  return {{"dims", state.shape().dims()},
          {"kind", "pure"},
          {"data", complex_array(a.data(), a.size())}};
}

json to_json(const DensityOperator& rho) { return matrix_json(rho.shape(), rho.matrix(), "density"); }

json to_json(const HermitianOperator& op) {
  return matrix_json(op.shape(), op.matrix(), "hermitian");
}

PureState pure_state_from_json(const json& j) {
  const Parsed p = parse(j);
  require(p.kind == "pure", ErrorKind::kInvalidArgument, "expected a pure state");
  return PureState(p.shape, p.values);
}

DensityOperator density_from_json(const json& j) {
  const Parsed p = parse(j);
  if (p.kind == "pure") {
    const PureState s(p.shape, p.values);
    require(s.is_normalized(1e-10), ErrorKind::kInvalidArgument, "pure state is not normalized");
    return DensityOperator::from_pure(s);
  }
  require(p.kind == "density", ErrorKind::kInvalidArgument, "expected a density operator");
  return DensityOperator(p.shape, as_matrix(p));
}

HermitianOperator operator_from_json(const json& j) {
  const Parsed p = parse(j);
  if (p.kind == "pure") return HermitianOperator(p.shape, p.values * p.values.adjoint());
  return HermitianOperator(p.shape, as_matrix(p));
}

json to_json(const GRTable& table) {
  json entries = json::array();
  for (const auto& p : table.partitions())
    for (int r = 1; r <= table.max_r(p); ++r) {
      const GREntry& e = table.at(p, r);
      entries.push_back({{"partition", p.label()},
                         {"r", r},
                         {"g", e.g},
                         {"method", std::string(to_string(e.method))},
                         {"exact", e.exact}});
    }
  return {{"operator_hash", table.operator_hash},
          {"subsystem_count", table.subsystem_count},
          {"entries", entries}};
}

GRTable gr_table_from_json(const json& j) {
  check_keys(j, {"operator_hash", "subsystem_count", "entries"});
  GRTable table;
  table.operator_hash = field<std::string>(j, "operator_hash");
  const json& entries = j.at("entries");
  require(entries.is_array(), ErrorKind::kInvalidArgument, "'entries' must be an array");
  int count = j.contains("subsystem_count") ? field<int>(j, "subsystem_count") : -1;
  if (count < 0)
    for (const auto& e : entries)
      count = std::max(count, Partition::parse(field<std::string>(e, "partition")).subsystem_count());
  table.subsystem_count = count;
  for (const auto& e : entries) {
    check_keys(e, {"partition", "r", "g", "method", "exact"});
    const Partition p = Partition::parse(field<std::string>(e, "partition"), count);
    const int r = field<int>(e, "r");
    require(r >= 1, ErrorKind::kInvalidArgument, "table entry with r < 1");
    GREntry entry;
    entry.g = field<double>(e, "g");
    entry.method = solve_method_from_string(field<std::string>(e, "method"));
    entry.exact = field<bool>(e, "exact");
    const bool inserted = table.entries.emplace(GRKey{p, r}, entry).second;
    require(inserted, ErrorKind::kInvalidArgument,
            "duplicate table entry " + p.label() + " r=" + std::to_string(r));
  }
  for (const auto& p : table.partitions())
    for (int r = 1; r <= table.max_r(p); ++r)
      require(table.entries.count({p, r}) == 1, ErrorKind::kInvalidArgument,
              "table entries for " + p.label() + " skip r=" + std::to_string(r));
  return table;
}

json to_json(const SQEReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"partition", e.partition.label()},
                       {"r", e.r},
                       {"tr_rho_L", e.tr_rho_l},
                       {"g", e.g},
                       {"exact", e.exact},
                       {"certified", e.certified}});
  json max_r = json::object();
  for (const auto& [p, r] : report.max_certified_r) max_r[p.label()] = r;
  return {{"state_id", report.state_id},
          {"operator_hash", report.operator_hash},
          {"margin", report.margin},
          {"entries", entries},
          {"summary", {{"max_certified_r", max_r},
                       {"genuine_multipartite", report.genuine_multipartite}}}};
}

json solution_to_json(const SQESolution& s) {
  return {{"partition", s.spinor.partition.label()},
          {"r", s.spinor.rank},
          {"g", s.g},
          {"converged", s.converged},
          {"restarts_used", s.restarts_used},
          {"residual_norm", s.residual_norm},
          {"orthogonality_violation", s.residual_orthogonality},
          {"method", std::string(to_string(s.method))}};
}

json error_to_json(const Error& error) {
  json out = {{"error", std::string(to_string(error.kind()))}, {"message", error.what()}};
  if (const auto* sf = dynamic_cast<const SolverFailure*>(&error)) out["best_g"] = sf->best_g();
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kInvalidArgument, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  require(out.good(), ErrorKind::kInvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace sqe::io
