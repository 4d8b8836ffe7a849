#include "stratkit/manifest.hpp"

#include <fstream>
#include <sstream>

#include "stratkit/errors.hpp"

#ifndef STRATKIT_VERSION
#define STRATKIT_VERSION "0.0.0"
#endif

namespace stratkit {

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 0x100000001b3ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for fingerprinting: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

const char* tool_version() { return STRATKIT_VERSION; }

void write_manifest(const nlohmann::ordered_json& manifest,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace stratkit
