#pragma once

namespace rotip {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rotip
