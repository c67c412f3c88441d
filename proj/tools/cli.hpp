#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tflab::cli {

/// Runs one CLI invocation (args[0] is the program name). Output files named
/// by --out are written directly; everything else goes to `out` / `err`.
/// Returns 0 on success, 1 on a numerical or I/O failure, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tflab::cli
