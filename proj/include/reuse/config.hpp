#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reuse/experiments.hpp"
#include "reuse/io.hpp"

namespace reuse::config {

/// Prefix of environment overrides: REUSE_SGD_<SECTION>_<KEY>, e.g. REUSE_SGD_TRAINER_T11=400.
inline constexpr const char* kEnvPrefix = "REUSE_SGD_";

struct Settings {
    experiments::SweepGrid sweep;  // sweep.base is the single-run configuration
    bool svg = false;

    experiments::RunConfig& run() { return sweep.base; }
    const experiments::RunConfig& run() const { return sweep.base; }
};

/// Every accepted "section.key".
const std::vector<std::string>& known_keys();

/// Sets one key. Values may be JSON values or strings ("1,2,3" for lists).
/// Unknown keys and malformed values throw ErrorKind::Config.
void apply_value(Settings& s, const std::string& key, const io::Json& value);

/// Either a JSON object of sections ({"trainer": {"T11": 10}}) or lines of
/// `section.key = value` with '#' comments. A missing file throws ErrorKind::Usage.
void load_file(Settings& s, const std::filesystem::path& path);
void load_text(Settings& s, const std::string& text, const std::string& origin = "<text>");

/// Applies REUSE_SGD_* variables from the given environment block.
void apply_env(Settings& s, char** envp);

io::Json resolved_json(const Settings& s);

/// "0,0,1" or "[0,0,1]" -> numbers.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace reuse::config
