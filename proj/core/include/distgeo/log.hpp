#pragma once

namespace distgeo::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity, read once from DISTGEO_LOG (error|warn|info|debug or 0-3).
Level level();

void message(Level lvl, const char* fmt, ...);

#define DISTGEO_LOGF(lvl, ...)                                        \
    do {                                                              \
        if (static_cast<int>(lvl) <= static_cast<int>(::distgeo::log::level())) \
            ::distgeo::log::message(lvl, __VA_ARGS__);                \
    } while (0)

#define LOG_ERROR(...) DISTGEO_LOGF(::distgeo::log::Level::error, __VA_ARGS__)
#define LOG_WARN(...) DISTGEO_LOGF(::distgeo::log::Level::warn, __VA_ARGS__)
#define LOG_INFO(...) DISTGEO_LOGF(::distgeo::log::Level::info, __VA_ARGS__)
#define LOG_DEBUG(...) DISTGEO_LOGF(::distgeo::log::Level::debug, __VA_ARGS__)

}  // namespace distgeo::log
