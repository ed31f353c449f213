#pragma once

namespace zson {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;  // world/episode/report JSON "v" field

}  // namespace zson
