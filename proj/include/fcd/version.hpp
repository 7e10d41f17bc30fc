#pragma once

namespace fcd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fcd
