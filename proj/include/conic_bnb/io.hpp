#pragma once

// JSON interchange format for problems. Matrices travel as

//   {"rows": r, "cols": c, "triplets": [[i, j, v], ...]}
//
// alongside plain arrays "q","h","b","l","u", cone blocks
// [{"kind": "zero"|"nonnegative"|"second_order", "dim": d}, ...] and integer
// sets [{"index": i, "values": [...]}]. Infinite bounds are encoded as the
// strings "inf" / "-inf" since JSON numbers cannot carry them.

#include <string>

#include "conic_bnb/problem.hpp"

namespace conic_bnb {

/// Serialize with two-space indentation; indent < 0 emits one line.
std::string problem_to_json(const MicpProblem& prob, int indent = 2);

/// Parse the interchange format. Throws std::runtime_error with a readable
/// message on malformed JSON, missing keys, or mistyped fields; structural
/// soundness beyond the schema is left to validate().
MicpProblem problem_from_json(const std::string& text);

/// File wrappers around the two above; load/save errors also surface as
/// std::runtime_error.
MicpProblem load_problem(const std::string& path);
void save_problem(const std::string& path, const MicpProblem& prob);

} // namespace conic_bnb
