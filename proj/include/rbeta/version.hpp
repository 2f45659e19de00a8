#pragma once

namespace rbeta {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace rbeta
