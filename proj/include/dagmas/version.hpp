#pragma once

namespace dagmas {

inline constexpr const char* version = "0.1.0";

}  // namespace dagmas
