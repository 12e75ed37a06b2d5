#pragma once

namespace mccs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mccs
