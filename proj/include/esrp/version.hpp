#pragma once

namespace esrp {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace esrp
