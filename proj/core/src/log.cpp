#include "distgeo/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace distgeo::log {

static Level parse_level() {
    const char* env = std::getenv("DISTGEO_LOG");
    if (!env) return Level::warn;
    if (!std::strcmp(env, "error") || !std::strcmp(env, "0")) return Level::error;
    if (!std::strcmp(env, "warn") || !std::strcmp(env, "1")) return Level::warn;
    if (!std::strcmp(env, "info") || !std::strcmp(env, "2")) return Level::info;
    if (!std::strcmp(env, "debug") || !std::strcmp(env, "3")) return Level::debug;
    return Level::warn;
}

Level level() {
    static Level lvl = parse_level();
    return lvl;
}

void message(Level lvl, const char* fmt, ...) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] ", names[static_cast<int>(lvl)]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace distgeo::log
