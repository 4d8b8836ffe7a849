#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace stratkit {

/// FNV-1a 64-bit content hash, hex-encoded. Fingerprints inputs in run
/// manifests; not cryptographic.
std::string fnv1a64_hex(const std::string& bytes);
std::string fingerprint_file(const std::string& path);

inline constexpr const char* kToolName = "stratkit";
const char* tool_version();

/// Writes the manifest JSON (2-space indent, trailing newline).
void write_manifest(const nlohmann::ordered_json& manifest,
                    const std::string& path);

}  // namespace stratkit
