#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace haai {

/// Library logger "haai", writing to stderr. Created on first use.
spdlog::logger& log();

}  // namespace haai
