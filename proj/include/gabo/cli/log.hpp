#pragma once

#include <string_view>

namespace gabo::cli {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Level from GABO_LOG (quiet, info, debug); info when unset. Throws on any
/// other value.
LogLevel log_level_from_env();
void set_log_level(LogLevel level);
LogLevel log_level();

/// Thread-safe line to stderr when `level` is enabled.
void log(LogLevel level, std::string_view message);
inline void log_info(std::string_view m) { log(LogLevel::info, m); }
inline void log_debug(std::string_view m) { log(LogLevel::debug, m); }

}  // namespace gabo::cli
