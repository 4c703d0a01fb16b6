#pragma once

namespace hpcfe::cli {

// Exit codes: 0 success, 1 validation error, 2 numerical failure.
int run(int argc, const char* const* argv);

}  // namespace hpcfe::cli
