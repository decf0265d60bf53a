#pragma once

#include <string>

namespace mlab {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Current verbosity, initialized once from the MONODROMY_LAB_LOG
/// environment variable ("error" | "info" | "debug", default "error").
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace mlab
