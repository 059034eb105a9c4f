#pragma once

#include <string>

#include "elsaa/harness.hpp"
#include "elsaa/problems.hpp"

namespace elsaa {

/// JSON object with keys problem (quadratic | cvar | portfolio), alpha, r_b,
/// dimension, mean, cov. Missing keys take the built-in defaults of the named
/// problem; `cov` may be nested rows or a flat row-major list. Throws
/// ConfigError naming every problem found, unknown keys included.
ProblemSpec parse_problem_spec(const std::string& json_text);

/// The problem-spec keys plus experiment (value | gap), sample_sizes,
/// replications, beta, seed, methods, oracle (analytic | monte-carlo),
/// oracle_draws, solution, jobs, restarts, max_cut_iterations.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_text_file(const std::string& path);

} // namespace elsaa
