#pragma once

#include <string>
#include <vector>

namespace antcensus {

/// Runs one CLI invocation. args excludes the program name. Exit codes:
/// 0 success, 1 usage error, 2 data error, 3 backend error. Diagnostics go to
/// stderr; stdout stays silent unless a CSV output is addressed as `--out -`.
int run_cli(std::vector<std::string> args);

} // namespace antcensus
