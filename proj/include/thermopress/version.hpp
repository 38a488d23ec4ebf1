#pragma once

namespace thermopress {

inline constexpr const char* kVersion = "0.1.0";

}
