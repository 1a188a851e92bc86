#pragma once

#include "bilap/disk.hpp"

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace bilap::cli {

enum ExitCode : int { ok = 0, input_error = 1, no_bound_state = 2, convergence_failure = 3 };

/// Solver and sampling settings shared by every subcommand.
struct Settings {
    SolverControl ctrl;
    std::size_t samples = 4096;
    unsigned threads = 0;
};

/// Applies `key = value` lines (rtol, T0, N0, n_max, samples, max_doublings,
/// growth, max_refinements, threads). Blank lines and '#' comments are skipped;
/// unknown keys throw ParameterError.
void apply_config(std::istream& in, Settings& s);

/// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bilap::cli
