#pragma once

namespace bbopt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bbopt
