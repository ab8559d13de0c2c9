#pragma once

#include <string_view>

namespace qlm::log {

/// Sets the stderr log level: trace, debug, info, warn, error, off.
/// Unknown names fall back to info.
void set_level(std::string_view level);

/// Reads QLM_LOG from the environment, if set.
void init_from_env();

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

}  // namespace qlm::log
