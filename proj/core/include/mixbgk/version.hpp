#pragma once

namespace mixbgk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixbgk
