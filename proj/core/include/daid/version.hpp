#pragma once

namespace daid {

/// Library version, embedded in every result JSON as `version`.
inline constexpr const char* kVersion = "daid-v0.1.0";

/// Schema version of all serialized artifacts (`spec_version` field).
inline constexpr int kSpecVersion = 1;

}  // namespace daid
