#pragma once

namespace jumpctl {
inline constexpr const char* kVersion = "0.1.0";
}
