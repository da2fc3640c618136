#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace tubelet {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Level comes from TUBELET_LOG ∈ {quiet, info, debug}; default info.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("TUBELET_LOG");
        if (env == nullptr) {
            return LogLevel::kInfo;
        }
        const std::string v(env);
        if (v == "quiet") return LogLevel::kQuiet;
        if (v == "debug") return LogLevel::kDebug;
        return LogLevel::kInfo;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::kInfo) {
        std::cerr << msg << "\n";
    }
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::kDebug) {
        std::cerr << msg << "\n";
    }
}

}  // namespace tubelet
