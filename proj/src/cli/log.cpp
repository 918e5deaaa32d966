#include "gabo/cli/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace gabo::cli {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::info)};
std::mutex g_mutex;
}  // namespace

LogLevel log_level_from_env() {
  const char* raw = std::getenv("GABO_LOG");
  if (!raw || !*raw) return LogLevel::info;
  const std::string v(raw);
  if (v == "quiet") return LogLevel::quiet;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  throw std::invalid_argument("GABO_LOG must be quiet, info or debug, got '" + v + "'");
}

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log(LogLevel level, std::string_view message) {
  if (level == LogLevel::quiet || static_cast<int>(level) > g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << (level == LogLevel::debug ? "[debug] " : "[info] ") << message << '\n';
}

}  // namespace gabo::cli
