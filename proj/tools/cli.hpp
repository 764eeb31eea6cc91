#pragma once

namespace ambench::cli {

/// Entry point behind the ambench binary; also linked by the test suites so
/// commands can run in-process. Returns 0 on success, 1 on configuration
/// errors, 2 on runtime failures.
int run(int argc, const char* const* argv);

}  // namespace ambench::cli
