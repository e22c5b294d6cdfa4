#pragma once

#include <string>

namespace ifd::log {

// Verbosity from the IFDETECT_LOG environment variable:
// "quiet" (errors only), "info" (default), "debug".
enum class Level { Quiet = 0, Info = 1, Debug = 2 };

Level level();
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace ifd::log
