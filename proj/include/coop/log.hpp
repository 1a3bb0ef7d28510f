#pragma once

namespace coop {

/// Sets the spdlog level from COOP_MPC_LOG (trace|debug|info|warn|error|off).
/// Unset or unknown values leave the level at warn.
void init_logging();

}  // namespace coop
