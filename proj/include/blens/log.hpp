/**
 * @file log.hpp
 * @brief Minimal leveled logger writing to stderr.
 *
 * The level is read once from the BLACKOUT_LENS_LOG environment variable
 * (error, warn, info, debug, trace; default warn). Logging never touches
 * stdout, which is reserved for machine-readable CLI output.
 */
#pragma once

#include <sstream>
#include <string>

namespace blens {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3, Trace = 4 };

/// Level parsed from BLACKOUT_LENS_LOG (cached after the first call).
LogLevel log_level();

/// True when messages at @p level should be emitted.
bool log_enabled(LogLevel level);

/// Writes one formatted line to stderr; no-op if the level is filtered.
void log_line(LogLevel level, const std::string& message);

namespace detail {

inline void log_fold(std::ostringstream&) {}

template <typename T, typename... Rest>
void log_fold(std::ostringstream& os, const T& head, const Rest&... rest) {
  os << head;
  log_fold(os, rest...);
}

}  // namespace detail

template <typename... Args>
void log(LogLevel level, const Args&... args) {
  if (!log_enabled(level)) return;
  std::ostringstream os;
  detail::log_fold(os, args...);
  log_line(level, os.str());
}

#define BLENS_LOG_ERROR(...) ::blens::log(::blens::LogLevel::Error, __VA_ARGS__)
#define BLENS_LOG_WARN(...) ::blens::log(::blens::LogLevel::Warn, __VA_ARGS__)
#define BLENS_LOG_INFO(...) ::blens::log(::blens::LogLevel::Info, __VA_ARGS__)
#define BLENS_LOG_DEBUG(...) ::blens::log(::blens::LogLevel::Debug, __VA_ARGS__)
#define BLENS_LOG_TRACE(...) ::blens::log(::blens::LogLevel::Trace, __VA_ARGS__)

}  // namespace blens
