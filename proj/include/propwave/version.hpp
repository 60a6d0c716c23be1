#pragma once

namespace propwave {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace propwave
