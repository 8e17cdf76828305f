// tabooscope command-line driver.
//
//   tabooscope run --config pipeline.ini
//   tabooscope <stage subcommand> ...
//
// Exit codes: 0 success, 1 validation error, 2 stage failure.

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabooscope/http_transport.hpp"
#include "tabooscope/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tabooscope;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitStage = 2;

struct EnrichArgs {
    std::string mode = "fixture";
    std::string cache;
    std::string api_base;
    std::string out;
};

void add_enrich_options(CLI::App* cmd, EnrichArgs& a) {
    cmd->add_option("--mode", a.mode, "live or fixture")->check(CLI::IsMember({"live", "fixture"}));
    cmd->add_option("--cache", a.cache, "response cache file")->required();
    cmd->add_option("--api", a.api_base, "service base URL (live mode)");
    cmd->add_option("--out", a.out, "output directory")->required();
}

std::unique_ptr<Transport> transport_for(const EnrichArgs& a) {
    if (parse_client_mode(a.mode) == ClientMode::fixture) return nullptr;
    if (a.api_base.empty()) throw ConfigError("--api is required in live mode");
    return std::make_unique<HttpTransport>(a.api_base);
}

std::vector<RevisionRecord> load_revisions(const std::string& path) {
    auto in = open_input(path);
    return read_revisions(in);
}

SampleManifest load_manifest(const std::string& path) {
    auto in = open_input(path);
    return read_manifest(in);
}

std::vector<fs::path> to_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

void print_log(const std::vector<std::string>& log) {
    for (const auto& l : log) std::cerr << l << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Taboo-article measurement pipeline"};
    app.require_subcommand(1);
    std::optional<std::string> mode_override;
    app.add_option("--mode", mode_override, "override client mode (live|fixture)")
        ->check(CLI::IsMember({"live", "fixture"}));

    // run
    std::string config_path, out_override;
    auto* run = app.add_subcommand("run", "run the full pipeline from a config file");
    run->add_option("--config", config_path, "pipeline config (INI)")->required();
    run->add_option("--out", out_override, "override output directory");

    // ingest-dictionary
    std::string dict_in, ingest_out;
    std::vector<std::string> stopwords;
    unsigned threads = 1;
    auto* ingest = app.add_subcommand("ingest-dictionary", "parse, filter and normalize dictionary senses");
    ingest->add_option("--input", dict_in, "wiktextract JSON lines")->required();
    ingest->add_option("--stopwords", stopwords, "stop-word lists")->required();
    ingest->add_option("--threads", threads);
    ingest->add_option("--out", ingest_out, "output directory")->required();

    // induce-lexicon
    std::string docs_path, induce_out, ngrams = "1:3";
    int top_k = 500;
    double lambda = 1.0;
    std::size_t min_df = 2;
    auto* induce = app.add_subcommand("induce-lexicon", "fit the ridge model and rank n-grams");
    induce->add_option("--docs", docs_path, "documents.tsv from ingest-dictionary")->required();
    induce->add_option("--top-k", top_k);
    induce->add_option("--lambda", lambda);
    induce->add_option("--min-df", min_df);
    induce->add_option("--ngrams", ngrams);
    induce->add_option("--threads", threads);
    induce->add_option("--out", induce_out, "output directory")->required();

    // extract-pages
    std::string dump_path, pages_out;
    auto* extract = app.add_subcommand("extract-pages", "write page metadata from an XML dump");
    extract->add_option("--dump", dump_path)->required();
    extract->add_option("--out", pages_out, "output pages.tsv")->required();

    // match-articles
    std::string lexicon_path, pages_path, match_out;
    std::size_t comparison_size = 3255;
    std::uint64_t seed = 0;
    auto* match = app.add_subcommand("match-articles", "build taboo and comparison samples");
    match->add_option("--lexicon", lexicon_path)->required();
    match->add_option("--pages", pages_path, "pages.tsv")->required();
    match->add_option("--docs", docs_path, "documents.tsv (comparison population n-grams)")->required();
    match->add_option("--stopwords", stopwords)->required();
    match->add_option("--ngrams", ngrams);
    match->add_option("--comparison-size", comparison_size);
    match->add_option("--seed", seed)->required();
    match->add_option("--out", match_out, "output directory")->required();

    // analyze-revisions
    std::string samples_path, protection_path, analyze_out, cutoff = "2008-01-01", horizon;
    std::vector<std::string> bots;
    std::size_t window = 10;
    auto* analyze = app.add_subcommand("analyze-revisions", "reverts, experience and protection for sampled pages");
    analyze->add_option("--dump", dump_path)->required();
    analyze->add_option("--bots", bots)->required();
    analyze->add_option("--protection-log", protection_path)->required();
    analyze->add_option("--samples", samples_path, "manifest.tsv")->required();
    analyze->add_option("--window", window);
    analyze->add_option("--cutoff", cutoff);
    analyze->add_option("--horizon", horizon)->required();
    analyze->add_option("--out", analyze_out, "output directory")->required();

    // enrichment
    std::string revisions_path, user_pages_path, pageviews_path, scope = std::string(kDefaultProjectScope);
    double threshold = 0.5;
    EnrichArgs quality_args, damaging_args, users_args, categories_args;
    auto* quality = app.add_subcommand("score-quality", "article quality at month-end revisions");
    quality->add_option("--revisions", revisions_path)->required();
    add_enrich_options(quality, quality_args);
    auto* damaging = app.add_subcommand("score-damaging", "damaging probability per revision");
    damaging->add_option("--revisions", revisions_path)->required();
    damaging->add_option("--threshold", threshold);
    add_enrich_options(damaging, damaging_args);
    auto* users = app.add_subcommand("fetch-users", "accountholder attributes");
    users->add_option("--revisions", revisions_path)->required();
    users->add_option("--samples", samples_path)->required();
    users->add_option("--user-pages", user_pages_path)->required();
    add_enrich_options(users, users_args);
    auto* categories = app.add_subcommand("fetch-categories", "article and talk-page categories");
    categories->add_option("--samples", samples_path)->required();
    categories->add_option("--project-scope", scope);
    add_enrich_options(categories, categories_args);
    auto* views = app.add_subcommand("rank-views", "mean within-month view rank per article");
    views->add_option("--pageviews", pageviews_path)->required();
    views->add_option("--samples", samples_path)->required();
    views->add_option("--out", analyze_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    auto apply_mode = [&](EnrichArgs& a) {
        if (mode_override) a.mode = *mode_override;
    };

    try {
        if (*run) {
            auto cfg = load_config(config_path);
            if (mode_override) cfg.mode = parse_client_mode(*mode_override);
            if (!out_override.empty()) cfg.output = fs::absolute(out_override);
            auto summary = run_pipeline(cfg, [](const PipelineConfig& c) -> std::unique_ptr<Transport> {
                return std::make_unique<HttpTransport>(c.api_base);
            });
            for (const auto& s : summary.stages)
                std::cout << s.name << ": " << (s.skipped ? "up to date" : "done") << "\n";
            std::cout << "report: " << (summary.report_dir / "report.txt").string() << "\n";
            return 0;
        }

        // Subcommands: argument problems are validation errors, processing problems stage failures.
        auto stage = [&](const char* name, auto&& body) -> int {
            try {
                body();
                return 0;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                std::cerr << "error: stage '" << name << "' failed: " << e.what() << "\n";
                return kExitStage;
            }
        };

        if (*ingest)
            return stage("ingest", [&] {
                auto s = stage_ingest(dict_in, to_paths(stopwords), ingest_out, threads);
                std::cout << "senses: " << s.senses << " kept: " << s.kept << " euphemistic: " << s.euphemistic
                          << " malformed lines: " << s.errors << "\n";
            });
        if (*induce) {
            InductionConfig ic;
            ic.ngrams = parse_ngram_range(ngrams);
            ic.min_df = min_df;
            ic.lambda = lambda;
            ic.top_k = top_k;
            ic.threads = threads;
            if (top_k <= 0) throw ConfigError("--top-k must be positive");
            return stage("induce", [&] {
                auto lex = stage_induce(docs_path, ic, induce_out);
                std::cout << "lexicon entries: " << lex.entries.size() << "\n";
            });
        }
        if (*extract)
            return stage("extract", [&] {
                auto pages = extract_pages(dump_path);
                auto out = open_output(pages_out);
                write_pages(out, pages);
                std::cout << "pages: " << pages.size() << "\n";
            });
        if (*match) {
            auto range = parse_ngram_range(ngrams);
            return stage("match", [&] {
                auto in = open_input(pages_path);
                auto pages = read_pages(in);
                auto m = stage_match(lexicon_path, docs_path, pages, to_paths(stopwords), range,
                                     MatchConfig{comparison_size, seed}, match_out);
                std::cout << "taboo: " << m.ids(Sample::taboo).size()
                          << " comparison: " << m.ids(Sample::comparison).size() << "\n";
            });
        }
        if (*analyze) {
            AnalysisConfig ac{window, parse_instant(cutoff), parse_instant(horizon)};
            return stage("analyze", [&] {
                auto a = stage_analyze(dump_path, samples_path, to_paths(bots), protection_path, ac, analyze_out);
                std::cout << "human revisions: " << a.revisions.size() << "\n";
                print_log(a.log);
            });
        }
        if (*quality) {
            apply_mode(quality_args);
            auto t = transport_for(quality_args);
            return stage("score-quality", [&] {
                std::vector<std::string> log;
                enrich_quality(load_revisions(revisions_path), quality_args.cache, parse_client_mode(quality_args.mode),
                               t.get(), quality_args.out, log);
                print_log(log);
            });
        }
        if (*damaging) {
            apply_mode(damaging_args);
            auto t = transport_for(damaging_args);
            return stage("score-damaging", [&] {
                std::vector<std::string> log;
                enrich_damaging(load_revisions(revisions_path), damaging_args.cache,
                                parse_client_mode(damaging_args.mode), t.get(), threshold, damaging_args.out, log);
                print_log(log);
            });
        }
        if (*users) {
            apply_mode(users_args);
            auto t = transport_for(users_args);
            return stage("fetch-users", [&] {
                std::vector<std::string> log;
                auto in = open_input(user_pages_path);
                enrich_users(load_revisions(revisions_path), load_manifest(samples_path), read_user_pages(in),
                             users_args.cache, parse_client_mode(users_args.mode), t.get(), users_args.out, log);
                print_log(log);
            });
        }
        if (*categories) {
            apply_mode(categories_args);
            auto t = transport_for(categories_args);
            return stage("fetch-categories", [&] {
                std::vector<std::string> log;
                enrich_categories(load_manifest(samples_path), categories_args.cache,
                                  parse_client_mode(categories_args.mode), t.get(), scope, categories_args.out, log);
                print_log(log);
            });
        }
        if (*views)
            return stage("rank-views", [&] {
                std::vector<std::string> log;
                enrich_views(load_manifest(samples_path), pageviews_path, analyze_out, log);
                print_log(log);
            });
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return 0;
}
