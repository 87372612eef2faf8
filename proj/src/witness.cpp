#include "sqe/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "solver_detail.hpp"
#include "sqe/error.hpp"

namespace sqe {

namespace {

std::vector<int> sorted_sizes(const Partition& p) {
  std::vector<int> sizes;
  for (const auto& b : p.blocks()) sizes.push_back(static_cast<int>(b.size()));
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

bool table_order(const Partition& a, const Partition& b) {
  return std::make_tuple(a.party_count(), sorted_sizes(a), display_label(a)) <
         std::make_tuple(b.party_count(), sorted_sizes(b), display_label(b));
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void value(std::int64_t v) { bytes(&v, sizeof v); }
  void value(double v) {
    if (v == 0.0) v = 0.0;  // one hash for +0 and -0
    bytes(&v, sizeof v);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_matrix(const SystemShape& shape, const Matrix& m) {
  Fnv1a h;
  h.value(static_cast<std::int64_t>(shape.size()));
  for (int d : shape.dims()) h.value(static_cast<std::int64_t>(d));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      h.value(m(i, j).real());
      h.value(m(i, j).imag());
    }
  return h.hex();
}

Index trivial_rank(const SystemShape& shape, const Partition& p) {
  const auto dims = shape.party_dims(p);
  const Index largest = *std::max_element(dims.begin(), dims.end());
  return shape.total_dim() / largest;
}

}  // namespace

const GREntry& GRTable::at(const Partition& p, int r) const {
  const auto it = entries.find({p, r});
  require(it != entries.end(), ErrorKind::kInvalidIndex,
          "no table entry for " + p.label() + " r=" + std::to_string(r));
  return it->second;
}

std::vector<Partition> GRTable::partitions() const {
  std::vector<Partition> out;
  for (const auto& [key, entry] : entries)
    if (out.empty() || !(out.back() == key.first)) out.push_back(key.first);
  std::sort(out.begin(), out.end(), table_order);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int GRTable::max_r(const Partition& p) const {
  int best = 0;
  for (auto it = entries.lower_bound({p, 0}); it != entries.end() && it->first.first == p; ++it)
    best = std::max(best, it->first.second);
  return best;
}

std::optional<double> GRTable::value(const Partition& p, int r) const {
  const int top = max_r(p);
  if (top == 0 || r < 1) return std::nullopt;
  const auto it = entries.find({p, std::min(r, top)});
  if (it == entries.end()) return std::nullopt;
  return it->second.g;
}

std::string operator_hash(const HermitianOperator& op) {
  return hash_matrix(op.shape(), op.matrix());
}

std::string operator_hash(const DensityOperator& rho) {
  return hash_matrix(rho.shape(), rho.matrix());
}

GRTable build_gr_table(const HermitianOperator& op, const std::vector<Partition>& partitions,
                       const GRTableOptions& options) {
  for (const auto& p : partitions)
    require(p.subsystem_count() == op.shape().size(), ErrorKind::kInvalidShape,
            "partition " + p.label() + " does not match the operator's subsystems");
  const double lambda_max =
      Eigen::SelfAdjointEigenSolver<Matrix>(op.matrix(), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();

  unsigned outer = options.solver.threads;
  if (outer == 0) outer = std::max(1u, std::thread::hardware_concurrency());
  SolverOptions inner = options.solver;
  if (outer > 1) inner.threads = 1;

  const int count = static_cast<int>(partitions.size());
  std::vector<std::vector<GREntry>> rows(count);
  std::vector<std::exception_ptr> errors(count);
  detail::parallel_for(count, outer, [&](int k) {
    try {
      const Partition& p = partitions[k];
      Index limit = trivial_rank(op.shape(), p);
      if (options.max_r > 0) limit = std::min<Index>(limit, options.max_r);
      for (int r = 1; r <= limit; ++r) {
        const GrResult res = g_r_max(op, p, r, inner);
        GREntry e{res.g, res.method, res.exact, res.closed_form_g, res.heuristic_g};
        if (options.cross_check_tol && res.closed_form_exact && res.closed_form_g &&
            res.heuristic_g &&
            std::abs(*res.closed_form_g - *res.heuristic_g) > *options.cross_check_tol) {
          std::ostringstream msg;
          msg.precision(15);
          msg << "partition " << p.label() << " r=" << r << ": closed form " << *res.closed_form_g
              << " vs alternating solver " << *res.heuristic_g;
          fail(ErrorKind::kNumericalInconsistency, msg.str());
        }
        rows[k].push_back(e);
        if (res.g >= lambda_max - 1e-10) break;
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  GRTable table;
  table.operator_hash = operator_hash(op);
  table.subsystem_count = op.shape().size();
  for (int k = 0; k < count; ++k)
    for (std::size_t r = 0; r < rows[k].size(); ++r)
      table.entries[{partitions[k], static_cast<int>(r) + 1}] = rows[k][r];
  return table;
}

std::vector<std::string> check_consistency(const GRTable& table, double tol) {
  std::vector<std::string> issues;
  const auto parts = table.partitions();
  for (const auto& p : parts)
    for (int r = 1; r < table.max_r(p); ++r)
      if (table.at(p, r).g > table.at(p, r + 1).g + tol)
        issues.push_back("g_r decreases in r for " + p.label() + " at r=" + std::to_string(r));
  for (const auto& fine : parts)
    for (const auto& coarse : parts) {
      if (fine == coarse || !is_refinement(fine, coarse)) continue;
      const int top = std::max(table.max_r(fine), table.max_r(coarse));
      for (int r = 1; r <= top; ++r)
        if (*table.value(fine, r) > *table.value(coarse, r) + tol)
          issues.push_back("refinement " + fine.label() + " exceeds " + coarse.label() +
                           " at r=" + std::to_string(r));
    }
  return issues;
}

HermitianOperator make_witness(const HermitianOperator& op, double g_r) {
  require(std::isfinite(g_r), ErrorKind::kInvalidArgument, "g_r must be finite");
  const Index d = op.shape().total_dim();
  return HermitianOperator(op.shape(), g_r * Matrix::Identity(d, d) - op.matrix());
}

bool certify(const DensityOperator& rho, const HermitianOperator& op, const GREntry& entry,
             double margin) {
  if (!entry.exact)
    fail(ErrorKind::kSoundness,
         "g_r is a heuristic lower bound; certification needs an exact value");
  require(std::isfinite(margin) && margin >= 0.0, ErrorKind::kInvalidArgument,
          "margin must be finite and nonnegative");
  return expectation(op, rho) > entry.g + margin;
}

SQEReport sqe_report(const DensityOperator& rho, const HermitianOperator& op,
                     const GRTable& table, double margin) {
  require(rho.shape().dims() == op.shape().dims(), ErrorKind::kInvalidShape,
          "state and test operator have different shapes");
  require(table.subsystem_count == op.shape().size(), ErrorKind::kInvalidShape,
          "table was built for a different number of subsystems");
  require(table.operator_hash == operator_hash(op), ErrorKind::kInvalidArgument,
          "table was built for a different test operator");
  require(std::isfinite(margin) && margin >= 0.0, ErrorKind::kInvalidArgument,
          "margin must be finite and nonnegative");

  SQEReport report;
  report.state_id = operator_hash(rho);
  report.operator_hash = table.operator_hash;
  report.margin = margin;
  const double tr = expectation(op, rho);
  for (const auto& p : table.partitions()) {
    int best = 0;
    for (int r = 1; r <= table.max_r(p); ++r) {
      const GREntry& e = table.at(p, r);
      ReportEntry row{p, r, tr, e.g, e.exact, e.exact && certify(rho, op, e, margin)};
      if (row.certified) best = r;
      report.entries.push_back(row);
    }
    report.max_certified_r.emplace_back(p, best);
  }
  bool genuine = op.shape().size() >= 2;
  for (const auto& cut : two_block_coarsenings(Partition::singletons(op.shape().size()))) {
    const auto it = table.entries.find({cut, 1});
    genuine = genuine && it != table.entries.end() && it->second.exact &&
              tr > it->second.g + margin;
  }
  report.genuine_multipartite = genuine;
  return report;
}

std::string display_label(const Partition& p) {
  auto blocks = p.blocks();
  std::stable_sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
    return std::make_pair(a.size(), a.front()) < std::make_pair(b.size(), b.front());
  });
  std::string out;
  for (std::size_t q = 0; q < blocks.size(); ++q) {
    if (q) out += ':';
    for (std::size_t k = 0; k < blocks[q].size(); ++k) {
      if (k) out += ',';
      out += std::to_string(blocks[q][k] + 1);
    }
  }
  return out;
}

std::string format_decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string render_table_text(const GRTable& table) {
  const auto parts = table.partitions();
  std::size_t width = std::string("partition").size();
  for (const auto& p : parts) width = std::max(width, display_label(p).size() + 2);
  width += 2;
  std::ostringstream out;
  out << "partition" << std::string(width - 9, ' ') << "g_r for r = 1, 2, ...\n";
  for (const auto& p : parts) {
    const std::string label = "P_" + display_label(p);
    out << label << std::string(width - label.size(), ' ') << '(';
    for (int r = 1; r <= table.max_r(p); ++r) {
      if (r > 1) out << ", ";
      out << format_decimal(table.at(p, r).g);
    }
    out << ')';
    bool exact = true;
    for (int r = 1; r <= table.max_r(p); ++r) exact = exact && table.at(p, r).exact;
    if (!exact) out << "  [lower bound]";
    out << '\n';
  }
  return out.str();
}

std::string render_report_text(const SQEReport& report) {
  std::ostringstream out;
  out << "state " << report.state_id << "  operator " << report.operator_hash << '\n';
  if (!report.entries.empty())
    out << "Tr[rho L] = " << format_decimal(report.entries.front().tr_rho_l) << '\n';
  for (const auto& [p, r] : report.max_certified_r) {
    const std::string label = "P_" + display_label(p);
    out << label << std::string(label.size() < 14 ? 14 - label.size() : 1, ' ');
    if (r == 0)
      out << "nothing certified\n";
    else
      out << "Schmidt number > " << r << '\n';
  }
  out << "genuine multipartite entanglement: " << (report.genuine_multipartite ? "yes" : "no")
      << '\n';
  return out.str();
}

}  // namespace sqe
