#pragma once

namespace radloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace radloc
