#pragma once

#include <iosfwd>

namespace icsu::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntimeFailure = 1,
    kUsageError = 2,  // bad flags or configuration
    kPartialRun = 3,  // request budget ran out before every question was answered
    kIoError = 4,
};

/// Entry point of the `icsu` binary; `argv[0]` is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace icsu::cli
