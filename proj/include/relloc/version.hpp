#pragma once

namespace relloc {
inline constexpr const char* kVersion = "0.1.0";
}
