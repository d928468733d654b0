#pragma once

// Command-line entry point: preprocess, make-toy, train, generate, explore,
// edit, eval, serve, ablate. Global options: --config, --set section.field=value
// (repeatable) and --seed.

#include <iosfwd>
#include <string>
#include <vector>

namespace scenegan {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenegan
