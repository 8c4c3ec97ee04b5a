#pragma once

#include "skewlab/config.hpp"
#include "skewlab/report.hpp"

namespace skewlab {

/// Dispatches one batch command (simulate, entropy, deviation, shadow,
/// irregular, dense-variant, lyapunov). Returns the process exit status:
/// 0 on success, a distinct nonzero code per module error otherwise.
int run_cli(int argc, char** argv);

/// Stable exit code for a named module error.
int error_exit_code(const std::string& code);

} // namespace skewlab
