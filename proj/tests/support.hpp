#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tabooscope/corpus.hpp"
#include "tabooscope/dictionary.hpp"
#include "tabooscope/pipeline.hpp"

namespace support {

namespace fs = std::filesystem;

inline fs::path source_dir() { return TABOOSCOPE_SOURCE_DIR; }

inline fs::path fixture_dir() { return source_dir() / "data" / "fixture"; }

inline const tabooscope::StopwordConfig& stopwords() {
    static const auto sw = tabooscope::StopwordConfig::load(
        {source_dir() / "data" / "stopwords_en.txt", source_dir() / "data" / "stopwords_extra.txt"});
    return sw;
}

// The bundled fixture config, redirected into `out` with a salt file shared
// between runs.
inline tabooscope::PipelineConfig fixture_config(const fs::path& out, const fs::path& secrets) {
    auto cfg = tabooscope::load_config(fixture_dir() / "fixture.ini");
    cfg.output = out;
    cfg.secrets = secrets;
    return cfg;
}

// Relative path -> file bytes for every regular file under `dir`.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = tabooscope::read_file(e.path());
    return out;
}

// page_id -> sample from the hand-labeled partition file.
inline std::map<std::int64_t, std::string> expected_partition() {
    std::map<std::int64_t, std::string> out;
    auto in = tabooscope::open_input(fixture_dir() / "partition.tsv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = tabooscope::split(line, '\t');
        out[tabooscope::parse_int<std::int64_t>(f[0])] = std::string(f[2]);
    }
    return out;
}

inline std::map<std::int64_t, std::string> manifest_partition(const fs::path& manifest) {
    auto in = tabooscope::open_input(manifest);
    std::map<std::int64_t, std::string> out;
    for (const auto& e : tabooscope::read_manifest(in).entries)
        out[e.page_id] = std::string(tabooscope::to_string(e.sample));
    return out;
}

// Raw identities found in the bundle: "file: identity" lines, empty when clean.
inline std::vector<std::string> identity_leaks(const fs::path& bundle) {
    std::vector<std::string> names;
    for (const auto& line : tabooscope::read_word_list(fixture_dir() / "identities.txt")) names.push_back(line);
    static const std::regex ipv4(R"((^|[^0-9.])(\d{1,3}\.){3}\d{1,3}([^0-9.]|$))");
    static const std::regex ipv6(R"([0-9A-Fa-f]{1,4}(:[0-9A-Fa-f]{0,4}){3,7})");
    std::vector<std::string> leaks;
    for (const auto& [file, text] : snapshot(bundle)) {
        for (const auto& n : names) {
            std::string underscored = n;
            std::replace(underscored.begin(), underscored.end(), ' ', '_');
            if (text.find(n) != std::string::npos || text.find(underscored) != std::string::npos)
                leaks.push_back(file + ": " + n);
        }
        if (std::regex_search(text, ipv4)) leaks.push_back(file + ": IPv4-formatted string");
        if (std::regex_search(text, ipv6)) leaks.push_back(file + ": IPv6-formatted string");
    }
    return leaks;
}

}  // namespace support
