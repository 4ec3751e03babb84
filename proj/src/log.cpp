#include "haai/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace haai {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    if (auto existing = spdlog::get("haai")) return existing;
    return spdlog::stderr_color_mt("haai");
  }();
  return *logger;
}

}  // namespace haai
