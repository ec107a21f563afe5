#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace reuse::io {

using Json = nlohmann::ordered_json;

/// JSON text with every floating-point value printed as %.17g.
/// indent < 0 gives a single line.
std::string dump(const Json& j, int indent = -1);
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

/// %.17g, with "nan"/"inf" spelled out.
std::string format_double(double v);

/// FNV-1a over the bytes of s, hex encoded.
std::string fnv1a_hex(const std::string& s);

}  // namespace reuse::io
