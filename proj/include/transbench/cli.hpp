#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace transbench::cli {

/// Runs the `bench` command line. `args` excludes the program name.
/// Returns 0 on success, 1 on a reported error (one `error: <Code>: <message>`
/// line on `err`), 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace transbench::cli
