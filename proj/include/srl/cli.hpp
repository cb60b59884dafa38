#pragma once

#include <iosfwd>

namespace srl {

/// Entry point of the `srl` tool. Exit codes: 0 success, 1 validation
/// failure, 2 numerical non-convergence, 64 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srl
