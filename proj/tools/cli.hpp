#pragma once

#include <iosfwd>

namespace frontlab::cli {

// Exit status: 0 success, 1 invalid config / assumption or validation failure,
// 2 solver nonconvergence.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frontlab::cli
