#pragma once

namespace aist {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace aist
