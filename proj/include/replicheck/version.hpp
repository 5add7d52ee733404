#pragma once

namespace replicheck {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* schema_version = "replicheck/1";

}  // namespace replicheck
