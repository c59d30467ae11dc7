#pragma once

// Command-line front end. run() parses argv, computes, and writes the result
// once at the end; `out` receives results written to "-", `err` messages.

#include <iosfwd>
#include <string>
#include <vector>

namespace ringnls::cli {

/// Exit status: 0 success, 1 solver or IO failure, 2 bad configuration.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count: the requested value (0 = hardware concurrency), capped by
/// RING_NLS_THREADS when that is a positive integer.
int thread_budget(int requested);

}  // namespace ringnls::cli
