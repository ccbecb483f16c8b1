#pragma once

namespace grls {

inline constexpr const char* kVersion = "0.1.0";

// Version of the JSON/CSV output layouts produced by the serialization layer.
inline constexpr int kSchemaVersion = 1;

}  // namespace grls
