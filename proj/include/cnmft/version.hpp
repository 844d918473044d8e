#pragma once

namespace cnmft {

inline constexpr const char* kVersion = "1.0.0";

} // namespace cnmft
