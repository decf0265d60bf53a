#include "mlab/log.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mlab {

static LogLevel read_level_from_env() {
    const char* v = std::getenv("MONODROMY_LAB_LOG");
    if (!v) return LogLevel::Error;
    if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(v, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
}

LogLevel log_level() {
    static const LogLevel level = read_level_from_env();
    return level;
}

static void emit(const char* tag, const std::string& msg) {
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

void log_error(const std::string& msg) {
    emit("error", msg);
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) emit("debug", msg);
}

}  // namespace mlab
