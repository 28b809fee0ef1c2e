#pragma once

#include <string>

#include "dpw/solver.hpp"
#include "dpw/surface.hpp"

namespace dpw {

struct JsonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Closing problems as human-editable JSON. Missing keys fall back to the
/// defaults, unknown keys are ignored, so seed files can carry notes.
std::string problem_to_json(const ClosingProblem& p);
ClosingProblem problem_from_json(const std::string& text);
ClosingProblem load_problem(const std::string& path);
void save_problem(const ClosingProblem& p, const std::string& path);

std::string report_to_json(const SolverReport& r);
std::string diagnostics_to_json(const DiagnosticsReport& d);

}  // namespace dpw
