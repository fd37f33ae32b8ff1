#include "unhaze/log.hpp"

#include <cstdlib>
#include <iostream>

namespace unhaze::log {

Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("UNHAZE_VERBOSITY");
    if (env == nullptr) return Level::Info;
    const std::string v(env);
    if (v == "quiet" || v == "0") return Level::Quiet;
    if (v == "debug" || v == "2") return Level::Debug;
    return Level::Info;
  }();
  return lvl;
}

void info(const std::string& msg) {
  if (level() >= Level::Info) std::cerr << "[info] " << msg << "\n";
}

void debug(const std::string& msg) {
  if (level() >= Level::Debug) std::cerr << "[debug] " << msg << "\n";
}

void warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

}  // namespace unhaze::log
