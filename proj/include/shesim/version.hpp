#pragma once

namespace shesim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace shesim
