#include "coop/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace coop {

void init_logging() {
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("COOP_MPC_LOG");
  if (env == nullptr) return;
  const auto level = spdlog::level::from_str(env);
  // from_str maps unknown names to off; only honor an explicit "off".
  if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
}

}  // namespace coop
