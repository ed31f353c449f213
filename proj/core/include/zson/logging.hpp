#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace zson {

// Verbosity from ZSON_LOG={error|info|debug}; unset or unknown means error.
enum class LogLevel { ERROR = 0, INFO = 1, DEBUG = 2 };

inline LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* e = std::getenv("ZSON_LOG");
    if (!e) return LogLevel::ERROR;
    if (std::strcmp(e, "debug") == 0) return LogLevel::DEBUG;
    if (std::strcmp(e, "info") == 0) return LogLevel::INFO;
    return LogLevel::ERROR;
  }();
  return lvl;
}

inline void log_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::INFO)
    std::fprintf(stderr, "info: %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::DEBUG)
    std::fprintf(stderr, "debug: %s\n", msg.c_str());
}

}  // namespace zson
