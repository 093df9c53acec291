#pragma once

namespace abcd {

inline constexpr const char* kVersion = "0.1.0";

}
