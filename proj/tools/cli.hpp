#pragma once

namespace canonpose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. Data goes to the declared output (or stdout), diagnostics to stderr.
int run(int argc, char** argv);

}  // namespace canonpose::cli
