#pragma once

namespace ps3 {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ps3
