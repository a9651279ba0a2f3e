#pragma once

#include <ostream>

namespace selfsort {

/// Entry point for the `selfsort` tool. Exit codes: 0 success, 1 refusal
/// (ignored trigger, fewer than two records), 2 usage or runtime error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selfsort
