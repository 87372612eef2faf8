#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include <json.hpp>

#include "sqe/error.hpp"
#include "sqe/sqe_solver.hpp"
#include "sqe/tensor.hpp"
#include "sqe/witness.hpp"

namespace sqe::io {

using json = nlohmann::json;

// State and operator files:
//   {"dims": [2, 2], "kind": "pure" | "density" | "hermitian",
//    "data": [[re, im], ...]}
// with matrices flattened row-major.

json to_json(const PureState& state);
json to_json(const DensityOperator& rho);
json to_json(const HermitianOperator& op);

PureState pure_state_from_json(const json& j);
/// Pure states are accepted and turned into projectors.
DensityOperator density_from_json(const json& j);
/// Pure states become |psi><psi|; density operators are taken as they are.
HermitianOperator operator_from_json(const json& j);

json to_json(const GRTable& table);
GRTable gr_table_from_json(const json& j);

json to_json(const SQEReport& report);
json solution_to_json(const SQESolution& solution);
json error_to_json(const Error& error);

json read_json_file(const std::filesystem::path& path);
/// Writes text to `path`, or to stdout when the path is empty or "-".
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sqe::io
