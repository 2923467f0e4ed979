#pragma once

namespace henon {

inline constexpr const char* kVersion = "0.1.0";

} // namespace henon
