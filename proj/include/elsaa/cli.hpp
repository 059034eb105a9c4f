#pragma once

#include <iosfwd>
#include <string>

#include "elsaa/sample_set.hpp"

namespace elsaa {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitSolver = 3 };

/// One observation per line, comma separated. A first line with any
/// non-numeric field is taken as a header. Throws DataError naming the line
/// at fault.
SampleSet parse_samples_csv(const std::string& text);

/// Entry point for the command-line tool. Results go to `out`, messages to
/// `err`; the return value is one of ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace elsaa
