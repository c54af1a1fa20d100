#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace mcem::cli {

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Level from MCEM_LOG (error|info|debug), info when unset or unrecognized.
inline LogLevel log_level() {
  const char* v = std::getenv("MCEM_LOG");
  if (!v) return LogLevel::info;
  const std::string s(v);
  if (s == "error") return LogLevel::error;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::info;
}

inline void log_line(LogLevel level, const std::string& message) {
  static std::mutex mu;
  if (level > log_level()) return;
  std::lock_guard<std::mutex> lock(mu);
  const char* tag = level == LogLevel::error ? "error" : level == LogLevel::info ? "info" : "debug";
  std::cerr << "[" << tag << "] " << message << "\n";
}

}  // namespace mcem::cli
