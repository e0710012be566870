#pragma once

namespace flowplan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace flowplan
