#pragma once

// Dictionary ingestion: wiktextract-style JSON lines -> word-senses ->
// filtered, normalized token documents labeled euphemistic or not.

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "common.hpp"

namespace tabooscope {

struct DictionarySense {
    std::string headword;
    std::string definition;
    std::set<std::string> tags;
    std::string language;
    bool euphemistic = false;

    friend bool operator==(const DictionarySense&, const DictionarySense&) = default;
};

struct NormalizedDocument {
    std::vector<std::string> tokens;
    bool label = false;
    std::string headword;

    friend bool operator==(const NormalizedDocument&, const NormalizedDocument&) = default;
};

struct ParseIssue {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct DictionaryParse {
    std::vector<DictionarySense> senses;
    std::vector<ParseIssue> errors;
};

class StopwordConfig {
  public:
    StopwordConfig() = default;
    explicit StopwordConfig(std::unordered_set<std::string> words) : words_(std::move(words)) {}

    // Loads one or more word-list files; all entries are lowercased.
    static StopwordConfig load(const std::vector<std::filesystem::path>& files) {
        std::unordered_set<std::string> words;
        for (const auto& f : files)
            for (auto& w : read_word_list(f)) words.insert(to_lower(w));
        return StopwordConfig(std::move(words));
    }

    bool contains(std::string_view token) const { return words_.count(std::string(token)) > 0; }
    std::size_t size() const { return words_.size(); }

  private:
    std::unordered_set<std::string> words_;
};

inline bool is_euphemism_tag(std::string_view tag) { return iequals(tag, "euphemistic"); }

// Bytes >= 0x80 belong to UTF-8 sequences and are kept as letters.
inline bool is_token_char(unsigned char c) { return std::isalpha(c) || c >= 0x80; }

inline std::vector<std::string> normalize_definition(std::string_view text,
                                                     const StopwordConfig& stopwords) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && !stopwords.contains(current)) tokens.push_back(current);
        current.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_token_char(c))
            current.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

namespace detail {

inline void parse_record_line(std::string_view line, std::size_t line_no,
                              std::vector<DictionarySense>& senses,
                              std::vector<ParseIssue>& errors) {
    using nlohmann::json;
    json rec = json::parse(line.begin(), line.end(), nullptr, false);
    if (rec.is_discarded()) {
        errors.push_back({line_no, "invalid JSON"});
        return;
    }
    if (!rec.is_object() || !rec.contains("word") || !rec["word"].is_string()) {
        errors.push_back({line_no, "record has no string field 'word'"});
        return;
    }
    if (!rec.contains("senses") || !rec["senses"].is_array()) {
        errors.push_back({line_no, "record has no array field 'senses'"});
        return;
    }
    std::string language;
    if (rec.contains("lang_code") && rec["lang_code"].is_string())
        language = rec["lang_code"].get<std::string>();
    else if (rec.contains("lang") && rec["lang"].is_string())
        language = rec["lang"].get<std::string>();

    std::vector<DictionarySense> out;
    for (const auto& sense : rec["senses"]) {
        if (!sense.is_object()) {
            errors.push_back({line_no, "sense is not an object"});
            return;
        }
        std::set<std::string> tags;
        if (sense.contains("tags")) {
            if (!sense["tags"].is_array()) {
                errors.push_back({line_no, "'tags' is not an array"});
                return;
            }
            for (const auto& t : sense["tags"])
                if (t.is_string()) tags.insert(t.get<std::string>());
        }
        bool euph = std::any_of(tags.begin(), tags.end(),
                                [](const std::string& t) { return is_euphemism_tag(t); });
        if (!sense.contains("glosses")) continue;
        if (!sense["glosses"].is_array()) {
            errors.push_back({line_no, "'glosses' is not an array"});
            return;
        }
        for (const auto& g : sense["glosses"]) {
            if (!g.is_string()) continue;
            out.push_back({rec["word"].get<std::string>(), g.get<std::string>(), tags, language,
                           euph});
        }
    }
    senses.insert(senses.end(), std::make_move_iterator(out.begin()),
                  std::make_move_iterator(out.end()));
}

}  // namespace detail

// One sense per (word, gloss) pair. Malformed lines are logged and skipped.
// With threads > 1 the lines are parsed in contiguous shards and merged in
// line order, so the result does not depend on the thread count.
inline DictionaryParse parse_dictionary_stream(std::istream& in, unsigned threads = 1) {
    if (!in) throw IoError("dictionary stream is not readable");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(std::move(line));
    if (in.bad()) throw IoError("read failure on dictionary stream");

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(lines.size() / 1024 + 1)));
    std::vector<DictionaryParse> shards(threads);
    auto work = [&](unsigned shard) {
        std::size_t begin = lines.size() * shard / threads;
        std::size_t end = lines.size() * (shard + 1) / threads;
        for (std::size_t i = begin; i < end; ++i) {
            if (trim(lines[i]).empty()) continue;
            detail::parse_record_line(lines[i], i + 1, shards[shard].senses, shards[shard].errors);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
        for (auto& t : pool) t.join();
    }
    DictionaryParse result;
    for (auto& s : shards) {
        result.senses.insert(result.senses.end(), std::make_move_iterator(s.senses.begin()),
                             std::make_move_iterator(s.senses.end()));
        result.errors.insert(result.errors.end(), s.errors.begin(), s.errors.end());
    }
    return result;
}

struct SenseFilterConfig {
    std::vector<std::string> redirect_prefixes{"synonym of", "initialism of", "abbreviation of",
                                               "alternative form of", "alternative spelling of"};
    // Matched against DictionarySense::language, either the code or the name.
    std::vector<std::string> languages{"en", "English"};
};

inline bool is_redirect_gloss(std::string_view gloss, const SenseFilterConfig& cfg) {
    gloss = trim(gloss);
    return std::any_of(cfg.redirect_prefixes.begin(), cfg.redirect_prefixes.end(),
                       [&](const std::string& p) { return istarts_with(gloss, p); });
}

// Order-preserving: the first occurrence of a (headword, definition) pair
// keeps its position and absorbs later duplicates' tags.
inline std::vector<DictionarySense> filter_senses(const std::vector<DictionarySense>& senses,
                                                  const SenseFilterConfig& cfg = {}) {
    std::vector<DictionarySense> kept;
    std::map<std::pair<std::string, std::string>, std::size_t> seen;
    for (const auto& s : senses) {
        if (trim(s.definition).empty()) continue;
        bool lang_ok = std::any_of(cfg.languages.begin(), cfg.languages.end(),
                                   [&](const std::string& l) { return iequals(l, s.language); });
        if (!lang_ok) continue;
        if (is_redirect_gloss(s.definition, cfg)) continue;
        auto key = std::make_pair(s.headword, s.definition);
        if (auto it = seen.find(key); it != seen.end()) {
            auto& prior = kept[it->second];
            prior.euphemistic = prior.euphemistic || s.euphemistic;
            prior.tags.insert(s.tags.begin(), s.tags.end());
            continue;
        }
        seen.emplace(std::move(key), kept.size());
        kept.push_back(s);
    }
    return kept;
}

inline std::vector<NormalizedDocument> normalize_senses(const std::vector<DictionarySense>& senses,
                                                        const StopwordConfig& stopwords) {
    std::vector<NormalizedDocument> docs;
    docs.reserve(senses.size());
    for (const auto& s : senses)
        docs.push_back({normalize_definition(s.definition, stopwords), s.euphemistic, s.headword});
    return docs;
}

// Document file: header line, then "label<TAB>headword<TAB>space-joined tokens".
inline void write_documents(std::ostream& out, const std::vector<NormalizedDocument>& docs) {
    out << "label\theadword\ttokens\n";
    for (const auto& d : docs)
        out << (d.label ? 1 : 0) << '\t' << sanitize_field(d.headword) << '\t'
            << join_tokens(d.tokens) << '\n';
}

inline std::vector<NormalizedDocument> read_documents(std::istream& in) {
    std::vector<NormalizedDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("label\t", 0) == 0) continue;
        if (line.empty()) continue;
        auto f = split(line, '\t');
        if (f.size() != 3 || (f[0] != "0" && f[0] != "1"))
            throw ParseError("document file line " + std::to_string(line_no) + " is malformed");
        NormalizedDocument d;
        d.label = f[0] == "1";
        d.headword = std::string(f[1]);
        if (!f[2].empty())
            for (auto t : split(f[2], ' ')) d.tokens.emplace_back(t);
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace tabooscope
