#pragma once

// Title matching against n-gram sets, redirect resolution, non-article
// filtering and the taboo / comparison sample draw.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "common.hpp"
#include "dictionary.hpp"
#include "lexicon.hpp"

namespace tabooscope {

enum class PageKind { article, redirect, disambiguation, list };
enum class Sample { taboo, comparison };

inline std::string_view to_string(PageKind k) {
    switch (k) {
        case PageKind::article: return "article";
        case PageKind::redirect: return "redirect";
        case PageKind::disambiguation: return "disambiguation";
        case PageKind::list: return "list";
    }
    return "article";
}

inline std::string_view to_string(Sample s) { return s == Sample::taboo ? "taboo" : "comparison"; }

inline Sample parse_sample(std::string_view s) {
    if (s == "taboo") return Sample::taboo;
    if (s == "comparison") return Sample::comparison;
    throw ParseError("unknown sample label '" + std::string(s) + "'");
}

// Raw page metadata as extracted from a dump.
struct PageInfo {
    std::int64_t page_id = 0;
    std::string title;
    std::string redirect;              // target title, possibly "Page#Section"; empty if none
    std::vector<std::string> markers;  // e.g. "disambiguation"
};

struct RedirectTarget {
    std::string title;
    std::optional<std::string> section;
};

struct ArticleRecord {
    std::int64_t page_id = 0;
    std::string title;
    std::vector<std::string> normalized_title;
    PageKind kind = PageKind::article;
    std::optional<RedirectTarget> redirect_target;
    std::optional<Sample> sample;
};

// MediaWiki title identity: underscores are spaces and the first letter is
// case-insensitive.
inline std::string canonical_title(std::string_view title) {
    std::string t(trim(title));
    std::replace(t.begin(), t.end(), '_', ' ');
    if (!t.empty()) t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
    return t;
}

inline std::vector<std::string> normalize_title(std::string_view title, const StopwordConfig& stopwords) {
    return normalize_definition(title, stopwords);
}

inline RedirectTarget parse_redirect_target(std::string_view raw) {
    RedirectTarget target;
    auto hash = raw.find('#');
    if (hash == std::string_view::npos) {
        target.title = canonical_title(raw);
    } else {
        target.title = canonical_title(raw.substr(0, hash));
        target.section = std::string(raw.substr(hash + 1));
    }
    return target;
}

inline bool has_disambiguation_marker(const PageInfo& page) {
    for (const auto& m : page.markers)
        if (to_lower(m).find("disambig") != std::string::npos) return true;
    std::string lower = to_lower(page.title);
    static constexpr std::string_view suffix = "(disambiguation)";
    return lower.size() >= suffix.size() && lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline ArticleRecord classify_page(const PageInfo& page, const StopwordConfig& stopwords) {
    ArticleRecord rec;
    rec.page_id = page.page_id;
    rec.title = page.title;
    rec.normalized_title = normalize_title(page.title, stopwords);
    if (!page.redirect.empty()) {
        rec.kind = PageKind::redirect;
        rec.redirect_target = parse_redirect_target(page.redirect);
    } else if (istarts_with(page.title, "List of ") || istarts_with(page.title, "Lists of ")) {
        rec.kind = PageKind::list;
    } else if (has_disambiguation_marker(page)) {
        rec.kind = PageKind::disambiguation;
    }
    return rec;
}

// Drops disambiguation and list pages; redirects are resolved separately.
inline bool filter_page(const ArticleRecord& rec) {
    return rec.kind != PageKind::disambiguation && rec.kind != PageKind::list;
}

class PageIndex {
  public:
    PageIndex() = default;
    explicit PageIndex(std::vector<ArticleRecord> records) : records_(std::move(records)) {
        std::sort(records_.begin(), records_.end(),
                  [](const auto& a, const auto& b) { return a.page_id < b.page_id; });
        for (std::size_t i = 0; i < records_.size(); ++i) {
            by_title_.emplace(canonical_title(records_[i].title), i);
            by_id_.emplace(records_[i].page_id, i);
        }
    }

    const std::vector<ArticleRecord>& records() const { return records_; }

    const ArticleRecord* find_title(const std::string& title) const {
        auto it = by_title_.find(canonical_title(title));
        return it == by_title_.end() ? nullptr : &records_[it->second];
    }

    const ArticleRecord* find_id(std::int64_t id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &records_[it->second];
    }

  private:
    std::vector<ArticleRecord> records_;
    std::unordered_map<std::string, std::size_t> by_title_;
    std::unordered_map<std::int64_t, std::size_t> by_id_;
};

struct Resolution {
    std::optional<ArticleRecord> record;
    std::string drop_reason;  // set when record is empty
};

inline constexpr int kMaxRedirectDepth = 5;

inline Resolution resolve_redirect(const ArticleRecord& rec, const PageIndex& index) {
    const ArticleRecord* cur = &rec;
    std::set<std::int64_t> visited{rec.page_id};
    for (int depth = 0; cur->kind == PageKind::redirect; ++depth) {
        if (depth >= kMaxRedirectDepth)
            return {std::nullopt, "redirect chain from '" + rec.title + "' exceeds depth " +
                                      std::to_string(kMaxRedirectDepth)};
        const auto& target = *cur->redirect_target;
        if (target.section)
            return {std::nullopt, "redirect '" + cur->title + "' targets section '" + target.title + "#" +
                                      *target.section + "'"};
        const ArticleRecord* next = index.find_title(target.title);
        if (!next) return {std::nullopt, "redirect target '" + target.title + "' not in corpus"};
        if (!visited.insert(next->page_id).second)
            return {std::nullopt, "redirect cycle through '" + next->title + "'"};
        cur = next;
    }
    return {*cur, {}};
}

struct TitleMatch {
    const ArticleRecord* record = nullptr;
    std::string ngram;
};

// Whole-title equality between the normalized title and an n-gram.
inline std::vector<TitleMatch> match_titles(const std::vector<ArticleRecord>& articles,
                                            const std::unordered_set<std::string>& ngrams) {
    std::vector<TitleMatch> out;
    if (ngrams.empty()) return out;
    for (const auto& a : articles) {
        if (a.normalized_title.empty()) continue;
        auto key = join_tokens(a.normalized_title);
        if (ngrams.count(key)) out.push_back({&a, key});
    }
    return out;
}

// Unbiased draw in [0, bound) by rejection; std::uniform_int_distribution is
// implementation-defined, which would make samples toolchain-dependent.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    while (true) {
        std::uint64_t v = rng();
        if (v < limit) return v % bound;
    }
}

// Uniform sample without replacement using a partial Fisher-Yates shuffle of
// the population sorted by page id, driven by mt19937_64(seed). Output is
// sorted by page id.
inline std::vector<ArticleRecord> sample_comparison(std::vector<ArticleRecord> population, std::size_t n,
                                                    std::uint64_t seed) {
    if (n > population.size())
        throw std::invalid_argument("comparison size " + std::to_string(n) + " exceeds population of " +
                                    std::to_string(population.size()));
    std::sort(population.begin(), population.end(),
              [](const auto& a, const auto& b) { return a.page_id < b.page_id; });
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto j = i + static_cast<std::size_t>(bounded_draw(rng, population.size() - i));
        std::swap(population[i], population[j]);
    }
    population.resize(n);
    std::sort(population.begin(), population.end(),
              [](const auto& a, const auto& b) { return a.page_id < b.page_id; });
    return population;
}

struct ManifestEntry {
    std::int64_t page_id = 0;
    std::string title;
    Sample sample = Sample::comparison;
    std::string ngram;      // n-gram that matched
    std::string via_title;  // title that matched (differs from title after a redirect)

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct SampleManifest {
    std::vector<ManifestEntry> entries;  // sorted by (sample, page_id)
    std::size_t population_size = 0;     // comparison population before sampling
    std::vector<std::string> log;

    std::vector<std::int64_t> ids(Sample s) const {
        std::vector<std::int64_t> out;
        for (const auto& e : entries)
            if (e.sample == s) out.push_back(e.page_id);
        return out;
    }
};

struct MatchConfig {
    std::size_t comparison_size = 3255;
    std::uint64_t seed = 0;
};

inline std::unordered_set<std::string> population_ngrams(const std::vector<NormalizedDocument>& docs,
                                                         NgramRange range) {
    std::unordered_set<std::string> out;
    for (const auto& d : docs)
        for (auto& g : extract_ngrams(d.tokens, range)) out.insert(std::move(g));
    return out;
}

inline SampleManifest build_samples(const std::vector<PageInfo>& pages, const TabooLexicon& lexicon,
                                    const std::unordered_set<std::string>& definition_ngrams,
                                    const StopwordConfig& stopwords, const MatchConfig& cfg) {
    std::vector<ArticleRecord> records;
    records.reserve(pages.size());
    for (const auto& p : pages) records.push_back(classify_page(p, stopwords));
    PageIndex index(std::move(records));

    SampleManifest manifest;
    // Resolved article id -> (matched n-gram, via title); first match by page id wins.
    auto resolve_matches = [&](const std::vector<TitleMatch>& matches) {
        std::map<std::int64_t, ManifestEntry> out;
        for (const auto& m : matches) {
            auto res = resolve_redirect(*m.record, index);
            if (!res.record) {
                manifest.log.push_back("drop: " + res.drop_reason);
                continue;
            }
            if (!filter_page(*res.record)) {
                manifest.log.push_back("drop: '" + res.record->title + "' is a " +
                                       std::string(to_string(res.record->kind)) + " page");
                continue;
            }
            out.try_emplace(res.record->page_id,
                            ManifestEntry{res.record->page_id, res.record->title, Sample::comparison, m.ngram,
                                          m.record->title});
        }
        return out;
    };

    std::unordered_set<std::string> taboo_ngrams;
    for (const auto& e : lexicon.entries) taboo_ngrams.insert(e.ngram);
    auto taboo = resolve_matches(match_titles(index.records(), taboo_ngrams));
    auto population_matches = resolve_matches(match_titles(index.records(), definition_ngrams));

    std::vector<ArticleRecord> population;
    for (const auto& [id, entry] : population_matches)
        if (!taboo.count(id)) population.push_back(*index.find_id(id));
    manifest.population_size = population.size();
    auto drawn = sample_comparison(std::move(population), cfg.comparison_size, cfg.seed);

    for (auto& [id, entry] : taboo) {
        entry.sample = Sample::taboo;
        manifest.entries.push_back(entry);
    }
    for (const auto& rec : drawn) manifest.entries.push_back(population_matches.at(rec.page_id));
    return manifest;
}

// Page metadata file: header, then page_id, title, redirect target, markers (comma-separated).
inline void write_pages(std::ostream& out, const std::vector<PageInfo>& pages) {
    out << "page_id\ttitle\tredirect\tmarkers\n";
    for (const auto& p : pages) {
        out << p.page_id << '\t' << sanitize_field(p.title) << '\t' << sanitize_field(p.redirect) << '\t';
        for (std::size_t i = 0; i < p.markers.size(); ++i) out << (i ? "," : "") << sanitize_field(p.markers[i]);
        out << '\n';
    }
}

inline std::vector<PageInfo> read_pages(std::istream& in) {
    std::vector<PageInfo> pages;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("page_id\t", 0) == 0) continue;
        if (line.empty()) continue;
        auto f = split(line, '\t');
        if (f.size() < 2 || f.size() > 4)
            throw ParseError("pages line " + std::to_string(line_no) + " is malformed");
        PageInfo p;
        p.page_id = parse_int<std::int64_t>(f[0], "page id");
        p.title = std::string(f[1]);
        if (f.size() > 2) p.redirect = std::string(f[2]);
        if (f.size() > 3 && !f[3].empty())
            for (auto m : split(f[3], ',')) p.markers.emplace_back(m);
        pages.push_back(std::move(p));
    }
    return pages;
}

inline void write_manifest(std::ostream& out, const SampleManifest& m) {
    out << "page_id\ttitle\tsample\tngram\tvia_title\n";
    for (const auto& e : m.entries)
        out << e.page_id << '\t' << sanitize_field(e.title) << '\t' << to_string(e.sample) << '\t' << e.ngram
            << '\t' << sanitize_field(e.via_title) << '\n';
}

inline SampleManifest read_manifest(std::istream& in) {
    SampleManifest m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("page_id\t", 0) == 0) continue;
        if (line.empty()) continue;
        auto f = split(line, '\t');
        if (f.size() != 5) throw ParseError("manifest line " + std::to_string(line_no) + " is malformed");
        m.entries.push_back({parse_int<std::int64_t>(f[0], "page id"), std::string(f[1]), parse_sample(f[2]),
                             std::string(f[3]), std::string(f[4])});
    }
    return m;
}

}  // namespace tabooscope
