#pragma once

namespace vtalign {
inline constexpr const char* kVersion = "0.1.0";
}
