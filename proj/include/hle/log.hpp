#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hle::log {

enum class Level { silent = 0, error = 1, warn = 2, info = 3, debug = 4 };

/// Level from HLE_LOG (silent|error|warn|info|debug), default warn.
inline Level threshold() {
    static const Level value = [] {
        const char* env = std::getenv("HLE_LOG");
        if (!env) return Level::warn;
        if (std::strcmp(env, "silent") == 0) return Level::silent;
        if (std::strcmp(env, "error") == 0) return Level::error;
        if (std::strcmp(env, "warn") == 0) return Level::warn;
        if (std::strcmp(env, "info") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return value;
}

template <typename... Args>
void emit(Level level, const char* tag, const char* fmt, Args... args) {
    if (level > threshold()) return;
    std::fprintf(stderr, "[hle:%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

template <typename... Args>
void info(const char* fmt, Args... args) {
    emit(Level::info, "info", fmt, args...);
}

template <typename... Args>
void warn(const char* fmt, Args... args) {
    emit(Level::warn, "warn", fmt, args...);
}

template <typename... Args>
void error(const char* fmt, Args... args) {
    emit(Level::error, "error", fmt, args...);
}

} // namespace hle::log
