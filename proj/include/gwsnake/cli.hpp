#pragma once

#include <ostream>

namespace gwsnake::cli {

// Runs one subcommand (sample, encode, verify, mc, report). Returns the
// process exit status: 0 success, 1 usage, 2 model or validation, 3 failed
// verification, 4 budget exceeded.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gwsnake::cli
