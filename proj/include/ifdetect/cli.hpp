#pragma once

namespace ifd::cli {

// Exit codes, also documented in the README.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitParse = 2;   // CLI usage, CSV/JSON parse, config errors
inline constexpr int kExitModel = 3;   // model/data errors (singular, dimensions, ...)
inline constexpr int kExitVerdict = 4; // fault not detectable / containment failure

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv);

}  // namespace ifd::cli
