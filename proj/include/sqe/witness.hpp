#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqe/partitions.hpp"
#include "sqe/sqe_solver.hpp"
#include "sqe/tensor.hpp"

namespace sqe {

inline constexpr double kDefaultCertificationMargin = 1e-9;

struct GREntry {
  double g = 0.0;
  SolveMethod method = SolveMethod::kAlternating;
  bool exact = false;
  std::optional<double> closed_form_g;
  std::optional<double> heuristic_g;
};

using GRKey = std::pair<Partition, int>;

/// g_r values of one test operator over (partition, r).
struct GRTable {
  std::string operator_hash;
  int subsystem_count = 0;
  std::map<GRKey, GREntry> entries;

  const GREntry& at(const Partition& p, int r) const;
  /// Partitions in table order: party count, block sizes, display label.
  std::vector<Partition> partitions() const;
  /// Largest r stored for p (0 when absent).
  int max_r(const Partition& p) const;
  /// g_r(p), saturating at the last stored r.
  std::optional<double> value(const Partition& p, int r) const;
};

/// FNV-1a over the dims and matrix entries, as 16 hex digits.
std::string operator_hash(const HermitianOperator& op);
std::string operator_hash(const DensityOperator& rho);

struct GRTableOptions {
  SolverOptions solver;
  /// Highest r per partition; 0 means the trivial rank where g_r = lambda_max.
  int max_r = 0;
  /// Throw when closed form and heuristic disagree by more than this.
  std::optional<double> cross_check_tol = 1e-8;
};

/// Fills g_r for every partition and r = 1, 2, ... until g_r reaches the
/// largest eigenvalue of L or max_r.
GRTable build_gr_table(const HermitianOperator& op, const std::vector<Partition>& partitions,
                       const GRTableOptions& options = {});

/// Rank and refinement monotonicity violations, one message each.
std::vector<std::string> check_consistency(const GRTable& table, double tol = 1e-8);

HermitianOperator make_witness(const HermitianOperator& op, double g_r);

/// Tr[rho L] > g_r + margin. Refuses entries that are not certified exact.
bool certify(const DensityOperator& rho, const HermitianOperator& op, const GREntry& entry,
             double margin = kDefaultCertificationMargin);

struct ReportEntry {
  Partition partition;
  int r = 0;
  double tr_rho_l = 0.0;
  double g = 0.0;
  bool exact = false;
  bool certified = false;
};

struct SQEReport {
  std::string state_id;
  std::string operator_hash;
  double margin = kDefaultCertificationMargin;
  std::vector<ReportEntry> entries;
  /// Per partition, the largest certified r (0 when none): the multipartite
  /// Schmidt number exceeds it.
  std::vector<std::pair<Partition, int>> max_certified_r;
  /// r = 1 certified for every 2-block partition.
  bool genuine_multipartite = false;
};

SQEReport sqe_report(const DensityOperator& rho, const HermitianOperator& op,
                     const GRTable& table, double margin = kDefaultCertificationMargin);

/// Blocks ordered by size, then by smallest member ("3:4:1,2").
std::string display_label(const Partition& p);
std::string format_decimal(double x);
std::string render_table_text(const GRTable& table);
std::string render_report_text(const SQEReport& report);

}  // namespace sqe
