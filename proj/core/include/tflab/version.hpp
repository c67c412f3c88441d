#pragma once

namespace tflab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tflab
