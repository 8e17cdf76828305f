#pragma once

// Config-driven pipeline: ingest -> induce -> match -> analyze -> enrich -> test.
// Each stage writes into <output>/stages/<name>/ and records a content hash of
// its inputs and parameters in stage.hash; a stage whose hash matches and
// whose outputs exist is skipped.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "dictionary.hpp"
#include "enrichment.hpp"
#include "lexicon.hpp"
#include "report.hpp"
#include "revisions.hpp"

namespace tabooscope {

namespace fs = std::filesystem;

struct PipelineConfig {
    fs::path config_path;
    // inputs
    fs::path dictionary;
    std::vector<fs::path> stopwords;
    fs::path dump;
    std::optional<fs::path> pages;  // page metadata; extracted from the dump when absent
    fs::path pageviews;
    fs::path protection_log;
    std::vector<fs::path> bots;
    fs::path quality_cache, damaging_cache, users_cache, categories_cache;
    std::optional<fs::path> secrets;  // default <output>/secrets/salt
    // parameters
    int top_k = 500;
    double lambda = 1.0;
    std::string ngrams = "1:3";
    std::size_t min_df = 2;
    std::size_t window = 10;
    std::size_t comparison_size = 3255;
    std::uint64_t seed = 0;
    std::string cutoff = "2008-01-01";
    std::string horizon;
    double damaging_threshold = 0.5;
    ClientMode mode = ClientMode::fixture;
    std::string api_base;
    std::string project_scope = std::string(kDefaultProjectScope);
    unsigned threads = 1;
    // output
    fs::path output;

    fs::path secrets_path() const { return secrets ? *secrets : output / "secrets" / "salt"; }
    fs::path stage_dir(const std::string& name) const { return output / "stages" / name; }
    fs::path report_dir() const { return output / "report"; }
};

// Raw "section.key" -> value text, as written in the config.
using RawConfig = std::map<std::string, std::string>;

inline RawConfig read_raw_config(const fs::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    RawConfig raw;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            raw[section] = body.data();
            continue;
        }
        for (const auto& [key, value] : body) raw[section + "." + key] = value.data();
    }
    return raw;
}

inline PipelineConfig parse_config(const RawConfig& raw, const fs::path& config_path = {}) {
    PipelineConfig c;
    c.config_path = config_path;
    fs::path base = config_path.empty() ? fs::current_path() : fs::absolute(config_path).parent_path();
    std::vector<std::string> missing, problems;

    static const std::set<std::string> known{
        "inputs.dictionary", "inputs.stopwords", "inputs.dump", "inputs.pages", "inputs.pageviews",
        "inputs.protection_log", "inputs.bots", "inputs.quality_cache", "inputs.damaging_cache",
        "inputs.users_cache", "inputs.categories_cache", "inputs.secrets", "parameters.top_k",
        "parameters.lambda", "parameters.ngrams", "parameters.min_df", "parameters.window",
        "parameters.comparison_size", "parameters.seed", "parameters.cutoff", "parameters.horizon",
        "parameters.damaging_threshold", "parameters.mode", "parameters.api_base", "parameters.project_scope",
        "parameters.threads", "output.dir"};
    for (const auto& [k, v] : raw)
        if (!known.count(k)) problems.push_back("unknown key '" + k + "'");

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = raw.find(key);
        if (it == raw.end() || trim(it->second).empty()) return std::nullopt;
        return std::string(trim(it->second));
    };
    auto resolve = [&](const std::string& v) {
        fs::path p(v);
        return p.is_absolute() ? p : (base / p).lexically_normal();
    };
    auto path = [&](const std::string& key, fs::path& dst) {
        if (auto v = get(key)) dst = resolve(*v);
        else missing.push_back(key);
    };
    auto path_list = [&](const std::string& key, std::vector<fs::path>& dst) {
        if (auto v = get(key)) {
            for (auto part : split(*v, ','))
                if (!trim(part).empty()) dst.push_back(resolve(std::string(trim(part))));
        }
        if (dst.empty()) missing.push_back(key);
    };
    auto param = [&](const std::string& key, auto& dst, bool required = false) {
        auto v = get(key);
        if (!v) {
            if (required) missing.push_back(key);
            return;
        }
        try {
            using T = std::decay_t<decltype(dst)>;
            if constexpr (std::is_same_v<T, std::string>) dst = *v;
            else if constexpr (std::is_same_v<T, double>) dst = parse_double(*v, key);
            else dst = parse_int<T>(*v, key);
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    };

    path("inputs.dictionary", c.dictionary);
    path_list("inputs.stopwords", c.stopwords);
    path("inputs.dump", c.dump);
    if (auto v = get("inputs.pages")) c.pages = resolve(*v);
    path("inputs.pageviews", c.pageviews);
    path("inputs.protection_log", c.protection_log);
    path_list("inputs.bots", c.bots);
    path("inputs.quality_cache", c.quality_cache);
    path("inputs.damaging_cache", c.damaging_cache);
    path("inputs.users_cache", c.users_cache);
    path("inputs.categories_cache", c.categories_cache);
    if (auto v = get("inputs.secrets")) c.secrets = resolve(*v);

    param("parameters.top_k", c.top_k);
    param("parameters.lambda", c.lambda);
    param("parameters.ngrams", c.ngrams);
    param("parameters.min_df", c.min_df);
    param("parameters.window", c.window);
    param("parameters.comparison_size", c.comparison_size);
    param("parameters.seed", c.seed, true);
    param("parameters.cutoff", c.cutoff);
    param("parameters.horizon", c.horizon, true);
    param("parameters.damaging_threshold", c.damaging_threshold);
    param("parameters.api_base", c.api_base);
    param("parameters.project_scope", c.project_scope);
    param("parameters.threads", c.threads);
    if (auto v = get("parameters.mode")) {
        try {
            c.mode = parse_client_mode(*v);
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    }
    path("output.dir", c.output);

    if (!missing.empty()) {
        std::string msg = "missing required config fields:";
        for (const auto& m : missing) msg += " " + m;
        problems.insert(problems.begin(), msg);
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
        throw ConfigError(msg);
    }
    return c;
}

inline PipelineConfig load_config(const fs::path& path) { return parse_config(read_raw_config(path), path); }

// Path existence and parameter ranges. Throws ConfigError listing every problem.
inline void validate_config(const PipelineConfig& c) {
    std::vector<std::string> problems;
    auto exists = [&](const fs::path& p, const char* what) {
        if (!fs::exists(p)) problems.push_back(std::string(what) + " not found: " + p.string());
    };
    exists(c.dictionary, "dictionary");
    for (const auto& p : c.stopwords) exists(p, "stopword list");
    exists(c.dump, "dump");
    if (c.pages) exists(*c.pages, "pages");
    exists(c.pageviews, "pageviews");
    exists(c.protection_log, "protection log");
    for (const auto& p : c.bots) exists(p, "bot list");
    if (c.mode == ClientMode::fixture) {
        exists(c.quality_cache, "quality cache");
        exists(c.damaging_cache, "damaging cache");
        exists(c.users_cache, "users cache");
        exists(c.categories_cache, "categories cache");
    }
    if (c.top_k <= 0) problems.push_back("top_k must be positive");
    if (!(c.lambda >= 0.0)) problems.push_back("lambda must be non-negative");
    if (c.min_df < 1) problems.push_back("min_df must be at least 1");
    if (c.window < 1) problems.push_back("window must be at least 1");
    if (!(c.damaging_threshold >= 0.0 && c.damaging_threshold <= 1.0))
        problems.push_back("damaging_threshold must lie in [0, 1]");
    if (c.threads < 1) problems.push_back("threads must be at least 1");
    if (c.mode == ClientMode::live && c.api_base.empty()) problems.push_back("live mode requires parameters.api_base");
    try {
        parse_ngram_range(c.ngrams);
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    try {
        if (parse_instant(c.horizon) <= parse_instant(c.cutoff)) problems.push_back("horizon must follow cutoff");
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
        throw ConfigError(msg);
    }
}

// Parameters echoed into the report header, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_echo(const PipelineConfig& c) {
    return {{"top_k", std::to_string(c.top_k)},
            {"lambda", format_double(c.lambda)},
            {"ngrams", c.ngrams},
            {"min_df", std::to_string(c.min_df)},
            {"window", std::to_string(c.window)},
            {"comparison_size", std::to_string(c.comparison_size)},
            {"seed", std::to_string(c.seed)},
            {"cutoff", c.cutoff},
            {"horizon", c.horizon},
            {"damaging_threshold", format_double(c.damaging_threshold)},
            {"mode", c.mode == ClientMode::live ? "live" : "fixture"},
            {"project_scope", c.project_scope},
            {"threads", std::to_string(c.threads)}};
}

class StageError : public std::runtime_error {
  public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

// ---------------------------------------------------------------------------
// Stage hashing

class StageHasher {
  public:
    explicit StageHasher(const std::string& stage) { h_.update("stage\x1f" + stage + "\n"); }
    StageHasher& param(const std::string& key, const std::string& value) {
        h_.update("p\x1f" + key + "\x1f" + value + "\n");
        return *this;
    }
    StageHasher& file(const std::string& key, const fs::path& path) {
        h_.update("f\x1f" + key + "\x1f" + sha256_hex(read_file(path)) + "\n");
        return *this;
    }
    std::string hex() { return h_.hex(); }

  private:
    Sha256 h_;
};

inline bool stage_current(const fs::path& dir, const std::string& hash, const std::vector<std::string>& outputs) {
    auto marker = dir / "stage.hash";
    if (!fs::exists(marker)) return false;
    if (trim(read_file(marker)) != hash) return false;
    return std::all_of(outputs.begin(), outputs.end(), [&](const std::string& o) { return fs::exists(dir / o); });
}

inline void mark_stage(const fs::path& dir, const std::string& hash) {
    auto out = open_output(dir / "stage.hash");
    out << hash << "\n";
}

inline void write_log(const fs::path& path, const std::vector<std::string>& lines) {
    auto out = open_output(path);
    for (const auto& l : lines) out << l << "\n";
}

// ---------------------------------------------------------------------------
// Stage bodies. Each reads its inputs from files and writes its outputs into
// `dir`; they are shared by the orchestrator and the per-stage subcommands.

struct IngestSummary {
    std::size_t senses = 0, kept = 0, euphemistic = 0, errors = 0;
};

inline IngestSummary stage_ingest(const fs::path& dictionary, const std::vector<fs::path>& stopwords,
                                  const fs::path& dir, unsigned threads = 1) {
    auto sw = StopwordConfig::load(stopwords);
    auto in = open_input(dictionary);
    auto parsed = parse_dictionary_stream(in, threads);
    auto kept = filter_senses(parsed.senses);
    auto docs = normalize_senses(kept, sw);
    {
        auto out = open_output(dir / "documents.tsv");
        write_documents(out, docs);
    }
    IngestSummary s{parsed.senses.size(), kept.size(), 0, parsed.errors.size()};
    for (const auto& d : docs) s.euphemistic += d.label ? 1 : 0;
    std::vector<std::string> log;
    for (const auto& e : parsed.errors) log.push_back("line " + std::to_string(e.line) + ": " + e.message);
    log.push_back("senses parsed: " + std::to_string(s.senses) + "; kept: " + std::to_string(s.kept) +
                  "; euphemistic: " + std::to_string(s.euphemistic));
    write_log(dir / "ingest.log", log);
    return s;
}

inline TabooLexicon stage_induce(const fs::path& documents, const InductionConfig& cfg, const fs::path& dir) {
    auto in = open_input(documents);
    auto docs = read_documents(in);
    auto lex = induce_lexicon(docs, cfg);
    auto out = open_output(dir / "lexicon.tsv");
    write_lexicon(out, lex);
    return lex;
}

inline std::vector<PageInfo> extract_pages(const fs::path& dump) {
    auto in = open_input(dump);
    std::set<std::int64_t> none;
    return scan_dump(in, &none).pages;
}

inline SampleManifest stage_match(const fs::path& lexicon, const fs::path& documents, const std::vector<PageInfo>& pages,
                                  const std::vector<fs::path>& stopwords, NgramRange range, const MatchConfig& cfg,
                                  const fs::path& dir) {
    auto sw = StopwordConfig::load(stopwords);
    auto lin = open_input(lexicon);
    auto lex = read_lexicon(lin);
    auto din = open_input(documents);
    auto docs = read_documents(din);
    auto manifest = build_samples(pages, lex, population_ngrams(docs, range), sw, cfg);
    {
        auto out = open_output(dir / "manifest.tsv");
        write_manifest(out, manifest);
    }
    auto log = manifest.log;
    log.push_back("taboo articles: " + std::to_string(manifest.ids(Sample::taboo).size()));
    log.push_back("comparison population: " + std::to_string(manifest.population_size) +
                  "; drawn: " + std::to_string(manifest.ids(Sample::comparison).size()));
    write_log(dir / "match.log", log);
    return manifest;
}

inline RevisionAnalysis stage_analyze(const fs::path& dump, const fs::path& manifest_path, const std::vector<fs::path>& bots,
                                      const fs::path& protection_log, const AnalysisConfig& cfg, const fs::path& dir) {
    auto min = open_input(manifest_path);
    auto manifest = read_manifest(min);
    std::set<std::int64_t> sampled;
    for (const auto& e : manifest.entries) sampled.insert(e.page_id);
    auto din = open_input(dump);
    auto scan = scan_dump(din, &sampled);
    auto pin = open_input(protection_log);
    auto events = read_protection_log(pin);
    auto analysis = analyze_revisions(std::move(scan.revisions), sampled, load_bot_names(bots), events, cfg);
    analysis.user_page_created = std::move(scan.user_page_created);
    {
        auto out = open_output(dir / "revisions.tsv");
        write_revisions(out, analysis.revisions);
    }
    {
        auto out = open_output(dir / "spells.tsv");
        write_spells(out, analysis.spells);
    }
    {
        auto out = open_output(dir / "protection.tsv");
        write_proportions(out, analysis.protected_proportion);
    }
    {
        auto out = open_output(dir / "user_pages.tsv");
        write_user_pages(out, analysis.user_page_created);
    }
    write_log(dir / "analyze.log", analysis.log);
    return analysis;
}

struct EnrichInputs {
    fs::path revisions;   // analyze/revisions.tsv
    fs::path manifest;    // match/manifest.tsv
    fs::path user_pages;  // analyze/user_pages.tsv
    fs::path pageviews;
    fs::path quality_cache, damaging_cache, users_cache, categories_cache;
    ClientMode mode = ClientMode::fixture;
    double damaging_threshold = 0.5;
    std::string project_scope = std::string(kDefaultProjectScope);
};

// Individual enrichment steps; each writes one table into `dir`.

inline std::map<std::int64_t, DamagingScore> enrich_damaging(const std::vector<RevisionRecord>& revisions,
                                                             const fs::path& cache_path, ClientMode mode,
                                                             Transport* transport, double threshold,
                                                             const fs::path& dir, std::vector<std::string>& log) {
    ResponseCache cache(cache_path, mode == ClientMode::fixture);
    BatchClient client("damaging", mode, cache, transport);
    std::vector<std::int64_t> ids;
    for (const auto& r : revisions) ids.push_back(r.revision_id);
    ScoreLog slog;
    auto scores = score_damaging(ids, client, threshold, &slog);
    auto out = open_output(dir / "damaging.tsv");
    out << "revision_id\tprobability\tdamaging\n";
    for (const auto& [id, s] : scores) out << id << '\t' << format_double(s.probability) << '\t' << s.damaging << '\n';
    log.push_back("damaging: scored " + std::to_string(scores.size()) + " of " + std::to_string(ids.size()) +
                  " revisions; unscored count as not damaging");
    for (auto& m : client.log()) log.push_back(m);
    for (auto& m : slog.messages) log.push_back(m);
    return scores;
}

inline std::map<std::int64_t, double> enrich_quality(const std::vector<RevisionRecord>& revisions,
                                                     const fs::path& cache_path, ClientMode mode, Transport* transport,
                                                     const fs::path& dir, std::vector<std::string>& log) {
    ResponseCache cache(cache_path, mode == ClientMode::fixture);
    BatchClient client("articlequality", mode, cache, transport);
    auto month_ends = month_end_revisions(revisions);
    std::vector<std::int64_t> ids;
    for (const auto& [page, list] : month_ends)
        for (const auto& [month, rev] : list) ids.push_back(rev);
    ScoreLog slog;
    auto scores = score_quality(ids, client, &slog);
    std::map<std::int64_t, double> by_rev;
    {
        auto out = open_output(dir / "quality.tsv");
        out << "revision_id";
        for (const char* c : kQualityClasses) out << "\tp_" << c;
        out << "\tquality\n";
        for (const auto& [id, s] : scores) {
            out << id;
            for (double p : s.class_probabilities) out << '\t' << format_double(p);
            out << '\t' << format_double(s.scalar) << '\n';
            by_rev[id] = s.scalar;
        }
    }
    std::map<std::int64_t, double> mean_quality;
    {
        auto out = open_output(dir / "quality_monthly.tsv");
        out << "page_id\tmonth\tquality\n";
        for (const auto& [page, list] : month_ends) {
            auto series = monthly_quality_series(list, by_rev);
            if (series.empty()) {
                log.push_back("article " + std::to_string(page) + " has no scored month-end revision");
                continue;
            }
            double sum = 0.0;
            for (const auto& q : series) {
                out << page << '\t' << q.month << '\t' << format_double(q.quality) << '\n';
                sum += q.quality;
            }
            mean_quality[page] = sum / static_cast<double>(series.size());
        }
    }
    log.push_back("quality: scored " + std::to_string(scores.size()) + " of " + std::to_string(ids.size()) +
                  " month-end revisions");
    for (auto& m : client.log()) log.push_back(m);
    for (auto& m : slog.messages) log.push_back(m);
    return mean_quality;
}

inline std::map<std::string, ContributorProfile> enrich_users(const std::vector<RevisionRecord>& revisions,
                                                              const SampleManifest& manifest,
                                                              const std::map<std::string, Instant>& user_pages,
                                                              const fs::path& cache_path, ClientMode mode,
                                                              Transport* transport, const fs::path& dir,
                                                              std::vector<std::string>& log) {
    auto taboo_ids = manifest.ids(Sample::taboo);
    std::set<std::int64_t> taboo(taboo_ids.begin(), taboo_ids.end());
    std::map<std::string, bool> ever_taboo;
    std::map<std::string, bool> page_at_contribution;
    for (const auto& r : revisions) {
        if (r.contributor.kind != ContributorKind::account || r.contributor.suppressed) continue;
        auto name = canonical_user(r.contributor.name);
        ever_taboo[name] = ever_taboo[name] || taboo.count(r.page_id) > 0;
        auto up = user_pages.find(name);
        bool has = up != user_pages.end() && up->second <= r.timestamp;
        page_at_contribution[name] = page_at_contribution[name] || has;
    }
    std::vector<std::string> names;
    for (const auto& [n, _] : ever_taboo) names.push_back(n);
    ResponseCache cache(cache_path, mode == ClientMode::fixture);
    BatchClient client("users", mode, cache, transport);
    auto profiles = fetch_user_attributes(names, client, &log);
    auto out = open_output(dir / "users.tsv");
    out << "user\tever_edited_taboo\thas_user_page\tgender_specified\tgender\temailable\tsnapshot\n";
    for (auto& [name, p] : profiles) {
        p.ever_edited_taboo = ever_taboo[name];
        p.has_user_page = page_at_contribution[name];
        out << sanitize_field(name) << '\t' << p.ever_edited_taboo << '\t' << p.has_user_page << '\t'
            << p.gender_specified << '\t'
            << (p.gender_value ? (*p.gender_value == Gender::female ? "female" : "male") : "unknown") << '\t'
            << p.emailable << '\t' << (p.snapshot.empty() ? "NA" : p.snapshot) << '\n';
    }
    log.push_back("users: " + std::to_string(profiles.size()) + " accountholders");
    for (auto& m : client.log()) log.push_back(m);
    return profiles;
}

inline std::map<std::int64_t, CategoryInfo> enrich_categories(const SampleManifest& manifest, const fs::path& cache_path,
                                                              ClientMode mode, Transport* transport,
                                                              const std::string& scope, const fs::path& dir,
                                                              std::vector<std::string>& log) {
    std::vector<std::string> titles;
    for (const auto& e : manifest.entries) titles.push_back(e.title);
    ResponseCache cache(cache_path, mode == ClientMode::fixture);
    BatchClient client("categories", mode, cache, transport);
    auto cats = fetch_categories(titles, client, scope, &log);
    std::map<std::int64_t, CategoryInfo> out_map;
    auto out = open_output(dir / "categories.tsv");
    out << "page_id\tin_scope\tn_categories\tcategories\n";
    for (const auto& e : manifest.entries) {
        const auto& info = cats[e.title];
        std::string joined;
        for (const auto& c : info.categories) joined += (joined.empty() ? "" : "|") + sanitize_field(c);
        out << e.page_id << '\t' << info.in_scope << '\t' << info.categories.size() << '\t' << joined << '\n';
        out_map[e.page_id] = info;
    }
    for (auto& m : client.log()) log.push_back(m);
    return out_map;
}

inline std::map<std::int64_t, double> enrich_views(const SampleManifest& manifest, const fs::path& pageviews,
                                                   const fs::path& dir, std::vector<std::string>& log) {
    std::map<std::string, std::int64_t> title_to_id;
    std::set<std::int64_t> ids;
    for (const auto& e : manifest.entries) {
        title_to_id[canonical_title(e.title)] = e.page_id;
        ids.insert(e.page_id);
    }
    auto in = open_input(pageviews);
    auto views = read_pageviews(in, title_to_id, ids, &log);
    auto ranks = rank_views(views, ids, &log);
    auto out = open_output(dir / "view_ranks.tsv");
    out << "page_id\tmean_view_rank\n";
    for (const auto& [id, r] : ranks) out << id << '\t' << format_double(r) << '\n';
    return ranks;
}

inline void stage_enrich(const EnrichInputs& in, Transport* transport, const fs::path& dir) {
    auto rin = open_input(in.revisions);
    auto revisions = read_revisions(rin);
    auto min = open_input(in.manifest);
    auto manifest = read_manifest(min);
    auto uin = open_input(in.user_pages);
    auto user_pages = read_user_pages(uin);
    std::vector<std::string> log;
    enrich_damaging(revisions, in.damaging_cache, in.mode, transport, in.damaging_threshold, dir, log);
    enrich_quality(revisions, in.quality_cache, in.mode, transport, dir, log);
    enrich_users(revisions, manifest, user_pages, in.users_cache, in.mode, transport, dir, log);
    enrich_categories(manifest, in.categories_cache, in.mode, transport, in.project_scope, dir, log);
    enrich_views(manifest, in.pageviews, dir, log);
    write_log(dir / "enrich.log", log);
}

// ---------------------------------------------------------------------------
// Test stage: reads the stage tables back, aggregates, runs the suites.

struct StageFiles {
    fs::path manifest, revisions, protection, damaging, quality_monthly, users, categories, view_ranks;
};

namespace detail {

inline std::vector<std::vector<std::string>> read_table(const fs::path& path) {
    auto in = open_input(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> row;
        for (auto f : split(line, '\t')) row.emplace_back(f);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline bool flag(const std::string& s) { return s == "1"; }

}  // namespace detail

inline Report stage_test(const StageFiles& f, const std::string& salt,
                         std::vector<std::pair<std::string, std::string>> header,
                         std::map<std::string, std::string> sources) {
    auto min = open_input(f.manifest);
    auto manifest = read_manifest(min);
    auto rin = open_input(f.revisions);
    auto revisions = read_revisions(rin);
    auto pin = open_input(f.protection);
    auto protection = read_proportions(pin);

    std::map<std::int64_t, bool> damaging;
    for (const auto& row : detail::read_table(f.damaging)) damaging[parse_int<std::int64_t>(row.at(0))] = detail::flag(row.at(2));
    for (auto& r : revisions) {
        auto it = damaging.find(r.revision_id);
        if (it != damaging.end()) r.is_damaging = it->second;
    }

    std::map<std::int64_t, Sample> sample_of;
    for (const auto& e : manifest.entries) sample_of[e.page_id] = e.sample;

    ArticleEnrichment enrich;
    enrich.protected_proportion = protection;
    for (const auto& row : detail::read_table(f.view_ranks))
        enrich.mean_view_rank[parse_int<std::int64_t>(row.at(0))] = parse_double(row.at(1));
    std::vector<QualityPoint> series;
    std::map<std::int64_t, std::pair<double, std::size_t>> qsum;
    for (const auto& row : detail::read_table(f.quality_monthly)) {
        auto id = parse_int<std::int64_t>(row.at(0));
        double q = parse_double(row.at(2));
        series.push_back({id, sample_of.count(id) ? sample_of[id] : Sample::comparison, row.at(1), q});
        qsum[id].first += q;
        qsum[id].second += 1;
    }
    for (const auto& [id, s] : qsum) enrich.mean_quality[id] = s.first / static_cast<double>(s.second);

    auto agg = aggregate_article_metrics(revisions, manifest, enrich);

    ReportInputs in;
    in.articles = std::move(agg.articles);
    in.log = std::move(agg.log);
    in.revisions = std::move(revisions);
    in.quality_series = std::move(series);
    for (const auto& row : detail::read_table(f.categories)) in.in_scope[parse_int<std::int64_t>(row.at(0))] = detail::flag(row.at(1));
    for (const auto& row : detail::read_table(f.users)) {
        ContributorRow c;
        c.id = redact_identity(salt, Contributor{ContributorKind::account, row.at(0), false});
        c.ever_edited_taboo = detail::flag(row.at(1));
        c.has_user_page = detail::flag(row.at(2));
        c.gender_specified = detail::flag(row.at(3));
        if (row.at(4) != "unknown") c.female = row.at(4) == "female";
        c.emailable = detail::flag(row.at(5));
        in.contributors.push_back(std::move(c));
    }
    std::sort(in.contributors.begin(), in.contributors.end(),
              [](const ContributorRow& a, const ContributorRow& b) { return a.id < b.id; });
    in.manifest = std::move(manifest);
    in.header = std::move(header);
    in.sources = std::move(sources);
    return build_report(std::move(in));
}

// ---------------------------------------------------------------------------
// Orchestrator

inline std::string load_or_create_salt(const fs::path& path) {
    if (fs::exists(path)) {
        auto s = std::string(trim(read_file(path)));
        if (s.empty()) throw ConfigError("secrets file is empty: " + path.string());
        return s;
    }
    std::random_device rd;
    std::string raw;
    for (int i = 0; i < 8; ++i) {
        auto v = rd();
        raw.append(reinterpret_cast<const char*>(&v), sizeof v);
    }
    auto salt = sha256_hex(raw);
    auto out = open_output(path);
    out << salt << "\n";
    out.close();
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
    return salt;
}

struct StageStatus {
    std::string name;
    bool skipped = false;
};

struct RunSummary {
    std::vector<StageStatus> stages;
    fs::path report_dir;
};

using TransportFactory = std::function<std::unique_ptr<Transport>(const PipelineConfig&)>;

inline RunSummary run_pipeline(const PipelineConfig& cfg, const TransportFactory& make_transport = nullptr) {
    validate_config(cfg);
    RunSummary summary;
    std::unique_ptr<Transport> transport;
    if (cfg.mode == ClientMode::live) {
        if (!make_transport) throw ConfigError("live mode requires a network transport");
        transport = make_transport(cfg);
    }
    auto salt = load_or_create_salt(cfg.secrets_path());
    auto range = parse_ngram_range(cfg.ngrams);

    auto run_stage = [&](const std::string& name, StageHasher& hasher, const std::vector<std::string>& outputs,
                         const std::function<void(const fs::path&)>& body) {
        auto dir = cfg.stage_dir(name);
        std::string hash;
        try {
            hash = hasher.hex();
            if (stage_current(dir, hash, outputs)) {
                summary.stages.push_back({name, true});
                return;
            }
            fs::create_directories(dir);
            fs::remove(dir / "stage.hash");
            body(dir);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
        mark_stage(dir, hash);
        summary.stages.push_back({name, false});
    };
    auto sd = [&](const std::string& stage, const std::string& file) { return cfg.stage_dir(stage) / file; };

    {
        StageHasher h("ingest");
        h.file("dictionary", cfg.dictionary);
        for (std::size_t i = 0; i < cfg.stopwords.size(); ++i) h.file("stopwords" + std::to_string(i), cfg.stopwords[i]);
        run_stage("ingest", h, {"documents.tsv", "ingest.log"},
                  [&](const fs::path& dir) { stage_ingest(cfg.dictionary, cfg.stopwords, dir, cfg.threads); });
    }
    {
        StageHasher h("induce");
        h.file("documents", sd("ingest", "documents.tsv"))
            .param("ngrams", cfg.ngrams)
            .param("min_df", std::to_string(cfg.min_df))
            .param("lambda", format_double(cfg.lambda))
            .param("top_k", std::to_string(cfg.top_k));
        run_stage("induce", h, {"lexicon.tsv"}, [&](const fs::path& dir) {
            InductionConfig ic;
            ic.ngrams = range;
            ic.min_df = cfg.min_df;
            ic.lambda = cfg.lambda;
            ic.top_k = cfg.top_k;
            ic.threads = cfg.threads;
            stage_induce(sd("ingest", "documents.tsv"), ic, dir);
        });
    }
    {
        StageHasher h("match");
        h.file("lexicon", sd("induce", "lexicon.tsv"))
            .file("documents", sd("ingest", "documents.tsv"))
            .file(cfg.pages ? "pages" : "dump", cfg.pages ? *cfg.pages : cfg.dump)
            .param("ngrams", cfg.ngrams)
            .param("comparison_size", std::to_string(cfg.comparison_size))
            .param("seed", std::to_string(cfg.seed));
        for (std::size_t i = 0; i < cfg.stopwords.size(); ++i) h.file("stopwords" + std::to_string(i), cfg.stopwords[i]);
        run_stage("match", h, {"manifest.tsv", "pages.tsv", "match.log"}, [&](const fs::path& dir) {
            std::vector<PageInfo> pages;
            if (cfg.pages) {
                auto in = open_input(*cfg.pages);
                pages = read_pages(in);
            } else {
                pages = extract_pages(cfg.dump);
            }
            {
                auto out = open_output(dir / "pages.tsv");
                write_pages(out, pages);
            }
            stage_match(sd("induce", "lexicon.tsv"), sd("ingest", "documents.tsv"), pages, cfg.stopwords, range,
                        MatchConfig{cfg.comparison_size, cfg.seed}, dir);
        });
    }
    AnalysisConfig ac{cfg.window, parse_instant(cfg.cutoff), parse_instant(cfg.horizon)};
    {
        StageHasher h("analyze");
        h.file("dump", cfg.dump)
            .file("manifest", sd("match", "manifest.tsv"))
            .file("protection_log", cfg.protection_log)
            .param("window", std::to_string(cfg.window))
            .param("cutoff", cfg.cutoff)
            .param("horizon", cfg.horizon);
        for (std::size_t i = 0; i < cfg.bots.size(); ++i) h.file("bots" + std::to_string(i), cfg.bots[i]);
        run_stage("analyze", h, {"revisions.tsv", "spells.tsv", "protection.tsv", "user_pages.tsv", "analyze.log"},
                  [&](const fs::path& dir) {
                      stage_analyze(cfg.dump, sd("match", "manifest.tsv"), cfg.bots, cfg.protection_log, ac, dir);
                  });
    }
    {
        StageHasher h("enrich");
        h.file("revisions", sd("analyze", "revisions.tsv"))
            .file("manifest", sd("match", "manifest.tsv"))
            .file("user_pages", sd("analyze", "user_pages.tsv"))
            .file("pageviews", cfg.pageviews)
            .param("damaging_threshold", format_double(cfg.damaging_threshold))
            .param("project_scope", cfg.project_scope)
            .param("mode", cfg.mode == ClientMode::live ? "live" : "fixture");
        for (auto [key, path] : {std::pair{"quality_cache", cfg.quality_cache}, std::pair{"damaging_cache", cfg.damaging_cache},
                                 std::pair{"users_cache", cfg.users_cache}, std::pair{"categories_cache", cfg.categories_cache}})
            if (fs::exists(path)) h.file(key, path);
        // Live runs always re-query; the cache absorbs repeated ids.
        if (cfg.mode == ClientMode::live) h.param("live_run", std::to_string(std::random_device{}()));
        EnrichInputs ei{sd("analyze", "revisions.tsv"), sd("match", "manifest.tsv"), sd("analyze", "user_pages.tsv"),
                        cfg.pageviews, cfg.quality_cache, cfg.damaging_cache, cfg.users_cache, cfg.categories_cache,
                        cfg.mode, cfg.damaging_threshold, cfg.project_scope};
        run_stage("enrich", h,
                  {"damaging.tsv", "quality.tsv", "quality_monthly.tsv", "users.tsv", "categories.tsv", "view_ranks.tsv",
                   "enrich.log"},
                  [&](const fs::path& dir) { stage_enrich(ei, transport.get(), dir); });
    }
    {
        StageFiles files{sd("match", "manifest.tsv"),     sd("analyze", "revisions.tsv"),
                         sd("analyze", "protection.tsv"), sd("enrich", "damaging.tsv"),
                         sd("enrich", "quality_monthly.tsv"), sd("enrich", "users.tsv"),
                         sd("enrich", "categories.tsv"),  sd("enrich", "view_ranks.tsv")};
        StageHasher h("test");
        for (auto [key, path] : {std::pair{"manifest", files.manifest}, std::pair{"revisions", files.revisions},
                                 std::pair{"protection", files.protection}, std::pair{"damaging", files.damaging},
                                 std::pair{"quality_monthly", files.quality_monthly}, std::pair{"users", files.users},
                                 std::pair{"categories", files.categories}, std::pair{"view_ranks", files.view_ranks}})
            h.file(key, path);
        h.param("salt", sha256_hex(salt));
        auto header = config_echo(cfg);
        header.insert(header.begin(), {"dictionary sha256", sha256_hex(read_file(cfg.dictionary))});
        header.insert(header.begin() + 1, {"dump sha256", sha256_hex(read_file(cfg.dump))});
        header.push_back({"identity redaction", "salted SHA-256 (salt kept in the local secrets file)"});
        for (const auto& [k, v] : header) h.param("header." + k, v);
        std::map<std::string, std::string> sources{
            {"views", "stages/enrich/view_ranks.tsv"},   {"metrics", "articles.tsv"},
            {"revisions", "stages/analyze/revisions.tsv"}, {"damaging", "stages/enrich/damaging.tsv"},
            {"quality", "stages/enrich/quality_monthly.tsv"}, {"protection", "stages/analyze/protection.tsv"},
            {"users", "stages/enrich/users.tsv"},          {"categories", "stages/enrich/categories.tsv"}};
        auto report_dir = cfg.report_dir();
        auto dir = cfg.stage_dir("test");
        std::string hash = h.hex();
        bool current = stage_current(dir, hash, {}) && fs::exists(report_dir / "report.txt");
        if (current) {
            summary.stages.push_back({"test", true});
        } else {
            try {
                fs::create_directories(dir);
                fs::remove(dir / "stage.hash");
                auto rep = stage_test(files, salt, header, sources);
                fs::remove_all(report_dir);
                write_report_bundle(rep, report_dir);
            } catch (const std::exception& e) {
                throw StageError("test", e.what());
            }
            mark_stage(dir, hash);
            summary.stages.push_back({"test", false});
        }
        summary.report_dir = report_dir;
    }
    return summary;
}

}  // namespace tabooscope
