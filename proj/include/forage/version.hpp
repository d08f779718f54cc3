#pragma once

namespace forage {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace forage
