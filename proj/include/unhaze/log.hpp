#pragma once

#include <string>

namespace unhaze::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

/// Verbosity from UNHAZE_VERBOSITY (quiet|info|debug, default info).
Level level();

void info(const std::string& msg);
void debug(const std::string& msg);
void warn(const std::string& msg);

}  // namespace unhaze::log
