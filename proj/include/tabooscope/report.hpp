#pragma once

// Hypothesis-test suites over article and contributor tables, and the
// report bundle writer (plain-text report plus delimited tables).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "revisions.hpp"
#include "stats.hpp"

namespace tabooscope {

// Salted, truncated SHA-256 of a contributor identity.
inline std::string redact_identity(const std::string& salt, const Contributor& c) {
    if (c.suppressed) return "suppressed";
    return sha256_hex(salt + "\x1f" + contributor_key(c)).substr(0, 16);
}

struct ContributorRow {
    std::string id;  // redacted
    bool ever_edited_taboo = false;
    bool has_user_page = false;
    bool gender_specified = false;
    std::optional<bool> female;
    bool emailable = false;
};

struct QualityPoint {
    std::int64_t page_id = 0;
    Sample sample = Sample::comparison;
    std::string month;
    double quality = 0.0;
};

struct ReportInputs {
    std::vector<ArticleMetrics> articles;
    std::vector<RevisionRecord> revisions;  // human revisions with damaging annotations
    std::vector<ContributorRow> contributors;
    std::map<std::int64_t, bool> in_scope;  // article -> project-scope flag
    std::vector<QualityPoint> quality_series;
    SampleManifest manifest;
    std::vector<std::pair<std::string, std::string>> header;  // echoed parameters and inputs
    std::map<std::string, std::string> sources;              // measure -> stage output file
    std::vector<std::string> log;
};

struct TestLine {
    std::string hypothesis;
    std::string label;
    std::string status = "ok";  // "ok" or "not run: <reason>"
    stats::TestResult result;
    std::vector<std::pair<std::string, double>> summaries;  // e.g. median (taboo)
};

struct RegressionTable {
    std::string id;  // file stem
    std::string title;
    std::string outcome;
    std::string status = "ok";
    stats::RegressionFit fit;
    std::string model_note;
};

struct Section {
    std::string id;
    std::string title;
    std::vector<TestLine> tests;
    std::vector<RegressionTable> regressions;
    std::vector<std::string> notes;
    std::vector<std::string> sources;
};

struct Report {
    std::vector<Section> sections;
    ReportInputs inputs;
};

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> split_by_sample(
    const std::vector<ArticleMetrics>& articles, const std::function<std::optional<double>(const ArticleMetrics&)>& get) {
    std::vector<double> taboo, comparison;
    for (const auto& a : articles) {
        auto v = get(a);
        if (!v || !std::isfinite(*v)) continue;
        (a.sample == Sample::taboo ? taboo : comparison).push_back(*v);
    }
    return {taboo, comparison};
}

inline TestLine mwu_line(const std::string& hyp, const std::string& label, const std::vector<ArticleMetrics>& articles,
                         const std::function<std::optional<double>(const ArticleMetrics&)>& get) {
    TestLine line;
    line.hypothesis = hyp;
    line.label = label;
    auto [taboo, comparison] = split_by_sample(articles, get);
    line.summaries = {{"median (taboo)", stats::median(taboo)},
                      {"median (comparison)", stats::median(comparison)},
                      {"mean (taboo)", stats::mean(taboo)},
                      {"mean (comparison)", stats::mean(comparison)}};
    line.result.test_name = "Mann-Whitney U";
    line.result.sizes = {taboo.size(), comparison.size()};
    if (taboo.empty() || comparison.empty()) {
        line.status = "not run: empty sample";
        return line;
    }
    try {
        line.result = stats::mann_whitney_u(taboo, comparison);
    } catch (const std::exception& e) {
        line.status = std::string("not run: ") + e.what();
    }
    return line;
}

inline TestLine chi2_line(const std::string& hyp, const std::string& label, const std::vector<bool>& group,
                          const std::vector<bool>& outcome) {
    TestLine line;
    line.hypothesis = hyp;
    line.label = label;
    line.result.test_name = "Chi-squared (Yates)";
    std::size_t g1 = 0, g1_yes = 0, g0_yes = 0;
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (group[i]) {
            ++g1;
            if (outcome[i]) ++g1_yes;
        } else if (outcome[i]) {
            ++g0_yes;
        }
    }
    std::size_t g0 = group.size() - g1;
    line.summaries = {{"share (ever taboo)", g1 ? static_cast<double>(g1_yes) / static_cast<double>(g1) : NAN},
                      {"share (never taboo)", g0 ? static_cast<double>(g0_yes) / static_cast<double>(g0) : NAN},
                      {"n (ever taboo)", static_cast<double>(g1)},
                      {"n (never taboo)", static_cast<double>(g0)}};
    try {
        line.result = stats::chi_squared_2x2(stats::cross_tabulate(group, outcome), true);
    } catch (const std::exception& e) {
        line.status = std::string("not run: ") + e.what();
    }
    return line;
}

template <typename Fit>
RegressionTable regression(const std::string& id, const std::string& title, const std::string& outcome,
                           const std::string& note, Fit&& fit) {
    RegressionTable t{id, title, outcome, "ok", {}, note};
    try {
        t.fit = fit();
    } catch (const std::exception& e) {
        t.status = std::string("not run: ") + e.what();
    }
    return t;
}

}  // namespace detail

inline Report build_report(ReportInputs in) {
    Report rep;
    const auto& A = in.articles;
    auto src = [&](const std::string& k) {
        auto it = in.sources.find(k);
        return it == in.sources.end() ? std::string("-") : it->second;
    };
    std::size_t n_taboo = 0, n_comp = 0;
    for (const auto& a : A) (a.sample == Sample::taboo ? n_taboo : n_comp)++;

    // H1
    Section h1{"H1", "Viewership", {}, {}, {}, {src("views"), src("metrics")}};
    h1.tests.push_back(detail::mwu_line("H1", "mean within-month view rank (1 = most viewed)", A,
                                        [](const ArticleMetrics& a) { return a.mean_view_rank; }));
    h1.notes.push_back("ranks are computed within the combined sample of each month");
    rep.sections.push_back(std::move(h1));

    // H2
    Section h2{"H2", "Contribution quantity", {}, {}, {}, {src("revisions"), src("metrics")}};
    h2.tests.push_back(detail::mwu_line("H2", "contributions per article", A, [](const ArticleMetrics& a) {
        return std::optional<double>(static_cast<double>(a.n_contributions));
    }));
    rep.sections.push_back(std::move(h2));

    // H3
    Section h3{"H3", "Contribution quality", {}, {}, {}, {src("revisions"), src("damaging"), src("metrics")}};
    h3.tests.push_back(detail::mwu_line("H3", "revert rate", A,
                                        [](const ArticleMetrics& a) { return std::optional<double>(a.revert_rate); }));
    h3.tests.push_back(detail::mwu_line("H3", "damaging rate", A,
                                        [](const ArticleMetrics& a) { return std::optional<double>(a.damaging_rate); }));
    {
        TestLine rho;
        rho.hypothesis = "H3";
        rho.label = "revert rate vs contribution count (all articles)";
        rho.result.test_name = "Spearman rho";
        std::vector<double> rr, nc;
        for (const auto& a : A) {
            rr.push_back(a.revert_rate);
            nc.push_back(static_cast<double>(a.n_contributions));
        }
        try {
            rho.result = stats::spearman_rho(rr, nc);
        } catch (const std::exception& e) {
            rho.status = std::string("not run: ") + e.what();
        }
        h3.tests.push_back(std::move(rho));
    }
    h3.regressions.push_back(detail::regression(
        "regression_h3_revert_count", "Linear model of article revert count", "Revert Count",
        "OLS; control for overall contribution count", [&] {
            if (!n_taboo || !n_comp) throw std::invalid_argument("empty sample");
            std::vector<double> taboo, count, y;
            for (const auto& a : A) {
                taboo.push_back(a.sample == Sample::taboo ? 1.0 : 0.0);
                count.push_back(static_cast<double>(a.n_contributions));
                y.push_back(static_cast<double>(a.revert_count));
            }
            return stats::ols_fit(stats::design_with_intercept({taboo, count}), y,
                                  {"(Intercept)", "Taboo", "Contribution Count"});
        }));
    rep.sections.push_back(std::move(h3));

    // H4
    Section h4{"H4", "Article quality", {}, {}, {}, {src("quality"), src("metrics")}};
    h4.tests.push_back(detail::mwu_line("H4", "mean monthly article quality (0-5)", A,
                                        [](const ArticleMetrics& a) { return a.mean_quality; }));
    rep.sections.push_back(std::move(h4));

    // H5
    Section h5{"H5", "Contributor identifiability", {}, {}, {}, {src("revisions"), src("protection"), src("users"), src("metrics")}};
    {
        std::map<std::int64_t, const ArticleMetrics*> by_id;
        for (const auto& a : A) by_id[a.page_id] = &a;
        h5.regressions.push_back(detail::regression(
            "regression_h5a_no_account", "H5A: contributing without an account (revision level)",
            "Contributing Without an Account",
            "pooled logistic regression; approximates a random-intercept model, interpret sign only", [&] {
                if (!n_taboo || !n_comp) throw std::invalid_argument("empty sample");
                std::vector<double> taboo, prot, y;
                for (const auto& r : in.revisions) {
                    auto it = by_id.find(r.page_id);
                    if (it == by_id.end()) continue;
                    taboo.push_back(it->second->sample == Sample::taboo ? 1.0 : 0.0);
                    prot.push_back(it->second->protected_proportion);
                    y.push_back(r.contributor.kind == ContributorKind::account ? 0.0 : 1.0);
                }
                return stats::logistic_fit(stats::design_with_intercept({taboo, prot}), y,
                                           {"(Intercept)", "Taboo", "Protection Level"});
            }));
    }
    h5.tests.push_back(detail::mwu_line("H5B", "mean editor experience (nth edit)", A,
                                        [](const ArticleMetrics& a) { return a.mean_editor_experience; }));
    h5.regressions.push_back(detail::regression(
        "regression_h5b_experience", "H5B: logged mean contributor experience", "Contribution Count (log)",
        "OLS on ln(mean nth edit); control for protected proportion", [&] {
            if (!n_taboo || !n_comp) throw std::invalid_argument("empty sample");
            std::vector<double> taboo, prot, y;
            for (const auto& a : A) {
                if (!a.mean_editor_experience) continue;
                taboo.push_back(a.sample == Sample::taboo ? 1.0 : 0.0);
                prot.push_back(a.protected_proportion);
                y.push_back(std::log(*a.mean_editor_experience));
            }
            return stats::ols_fit(stats::design_with_intercept({taboo, prot}), y,
                                  {"(Intercept)", "Taboo", "Protection Level"});
        }));
    {
        std::vector<bool> group, page, gender, email;
        std::vector<bool> g_specified, female;
        for (const auto& c : in.contributors) {
            group.push_back(c.ever_edited_taboo);
            page.push_back(c.has_user_page);
            gender.push_back(c.gender_specified);
            email.push_back(c.emailable);
            if (c.gender_specified && c.female) {
                g_specified.push_back(c.ever_edited_taboo);
                female.push_back(*c.female);
            }
        }
        h5.tests.push_back(detail::chi2_line("H5C", "user page x ever edited taboo", group, page));
        h5.tests.push_back(detail::chi2_line("H5D", "gender specified x ever edited taboo", group, gender));
        h5.tests.push_back(detail::chi2_line("H5D", "female (among specified) x ever edited taboo", g_specified, female));
        h5.tests.push_back(detail::chi2_line("H5E", "emailable x ever edited taboo", group, email));
    }
    h5.notes.push_back("H5C-E use the accountholder-level table; attributes are observed at query time");
    rep.sections.push_back(std::move(h5));

    // Validation
    Section val{"V", "Validation: project-scope categories", {}, {}, {}, {src("categories"), src("metrics")}};
    val.regressions.push_back(detail::regression(
        "regression_validation", "Taboo membership by project scope", "Taboo", "logistic regression (article level)", [&] {
            if (!n_taboo || !n_comp) throw std::invalid_argument("empty sample");
            std::vector<double> scope, y;
            for (const auto& a : A) {
                auto it = in.in_scope.find(a.page_id);
                scope.push_back(it != in.in_scope.end() && it->second ? 1.0 : 0.0);
                y.push_back(a.sample == Sample::taboo ? 1.0 : 0.0);
            }
            return stats::logistic_fit(stats::design_with_intercept({scope}), y, {"(Intercept)", "In Project Scope"});
        }));
    if (val.regressions.back().status == "ok") {
        const auto& f = val.regressions.back().fit;
        double p = stats::logistic(f.estimates[0] + f.estimates[1]);
        val.notes.push_back("P(taboo | in scope) = " + format_fixed(p, 4));
    }
    rep.sections.push_back(std::move(val));

    rep.inputs = std::move(in);
    return rep;
}

namespace detail {

inline std::string fmt(double v, int decimals = 4) {
    if (std::isnan(v)) return "NA";
    return format_fixed(v, decimals);
}

inline std::string fmt_p(double p) {
    if (std::isnan(p)) return "NA";
    if (p < 0.001) return "< 0.001";
    return "= " + format_fixed(p, 3);
}

inline std::string num(double v) { return std::isnan(v) ? "NA" : format_double(v); }

inline std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace detail

inline void write_regression_table(std::ostream& out, const RegressionTable& t) {
    out << "coefficient\testimate\tci_lower\tci_upper\tstd_error\tstatistic\tp_value\tformatted\n";
    if (t.status != "ok") return;
    const auto& f = t.fit;
    for (std::size_t i = 0; i < f.names.size(); ++i)
        out << f.names[i] << '\t' << format_double(f.estimates[i]) << '\t' << format_double(f.ci_lower[i]) << '\t'
            << format_double(f.ci_upper[i]) << '\t' << format_double(f.std_errors[i]) << '\t'
            << format_double(f.statistics[i]) << '\t' << format_double(f.p_values[i]) << '\t'
            << detail::fmt(f.estimates[i]) << " [" << detail::fmt(f.ci_lower[i]) << "; " << detail::fmt(f.ci_upper[i])
            << "]\n";
}

inline void render_regression(std::ostream& out, const RegressionTable& t) {
    out << "  " << t.title << "  (" << t.model_note << ")\n";
    out << "    table: " << t.id << ".tsv\n";
    if (t.status != "ok") {
        out << "    " << t.status << "\n";
        return;
    }
    const auto& f = t.fit;
    out << "    outcome: " << t.outcome << "\n";
    for (std::size_t i = 0; i < f.names.size(); ++i) {
        bool excludes_zero = f.ci_lower[i] > 0.0 || f.ci_upper[i] < 0.0;
        out << "    " << f.names[i] << ": " << detail::fmt(f.estimates[i]) << (excludes_zero ? "*" : "") << " ["
            << detail::fmt(f.ci_lower[i]) << "; " << detail::fmt(f.ci_upper[i]) << "]\n";
    }
    if (!std::isnan(f.r_squared))
        out << "    R^2: " << detail::fmt(f.r_squared) << "  Adj. R^2: " << detail::fmt(f.adj_r_squared) << "\n";
    else
        out << "    Log likelihood: " << detail::fmt(f.log_likelihood) << "  AIC: " << detail::fmt(f.aic) << "\n";
    out << "    Num. obs.: " << f.n << "\n";
    out << "    * 0 outside the confidence interval.\n";
}

inline void render_report(std::ostream& out, const Report& rep) {
    out << "TABOOSCOPE REPORT\n=================\n\n";
    out << "Parameters and inputs\n---------------------\n";
    for (const auto& [k, v] : rep.inputs.header) out << "  " << k << ": " << v << "\n";
    std::size_t n_taboo = 0, n_comp = 0;
    for (const auto& a : rep.inputs.articles) (a.sample == Sample::taboo ? n_taboo : n_comp)++;
    out << "\nSamples\n-------\n";
    out << "  taboo articles analyzed: " << n_taboo << "\n";
    out << "  comparison articles analyzed: " << n_comp << "\n";
    out << "  human revisions: " << rep.inputs.revisions.size() << "\n";
    out << "  accountholders: " << rep.inputs.contributors.size() << "\n";
    out << "  tables: articles.tsv, manifest.tsv, tests.tsv, quality_monthly.tsv, contributors.tsv\n";

    for (const auto& s : rep.sections) {
        std::string heading = (s.id == "V" ? std::string("Validation") : s.id) + ": " + s.title;
        if (s.id == "V") heading = s.title;
        out << "\n" << heading << "\n" << std::string(heading.size(), '-') << "\n";
        out << "  sources:";
        for (const auto& src : s.sources) out << " " << src;
        out << "\n";
        for (const auto& t : s.tests) {
            out << "  [" << t.hypothesis << "] " << t.label << "\n";
            for (const auto& [k, v] : t.summaries)
                out << "    " << k << ": " << detail::fmt(v, k.rfind("n ", 0) == 0 ? 0 : 4) << "\n";
            if (t.status != "ok") {
                out << "    " << t.status << "\n";
                continue;
            }
            std::string stat_name = t.result.test_name == "Mann-Whitney U" ? "U" : (t.result.test_name == "Spearman rho" ? "rho" : "chi2");
            out << "    " << t.result.test_name << ": " << stat_name << " = " << detail::fmt(t.result.statistic)
                << ", p " << detail::fmt_p(t.result.p_value);
            if (!t.result.notes.empty()) out << " (" << t.result.notes << ")";
            out << "\n";
        }
        for (const auto& r : s.regressions) render_regression(out, r);
        for (const auto& n : s.notes) out << "  note: " << n << "\n";
    }
    if (!rep.inputs.log.empty()) {
        out << "\nLog\n---\n";
        for (const auto& l : rep.inputs.log) out << "  " << l << "\n";
    }
}

// Writes the bundle into `dir` (created if needed).
inline void write_report_bundle(const Report& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_output(dir / "report.txt");
        render_report(out, rep);
    }
    {
        auto out = open_output(dir / "articles.tsv");
        out << "page_id\tsample\tmean_view_rank\tn_contributions\trevert_count\trevert_rate\tdamaging_rate\tmean_quality\t"
               "protected_proportion\tmean_editor_experience\tshare_no_account\n";
        for (const auto& a : rep.inputs.articles)
            out << a.page_id << '\t' << to_string(a.sample) << '\t' << detail::opt_num(a.mean_view_rank) << '\t'
                << a.n_contributions << '\t' << a.revert_count << '\t' << detail::num(a.revert_rate) << '\t'
                << detail::num(a.damaging_rate) << '\t' << detail::opt_num(a.mean_quality) << '\t'
                << detail::num(a.protected_proportion) << '\t' << detail::opt_num(a.mean_editor_experience) << '\t'
                << detail::num(a.share_no_account) << '\n';
    }
    {
        auto out = open_output(dir / "manifest.tsv");
        out << "page_id\ttitle\tsample\tngram\n";
        for (const auto& e : rep.inputs.manifest.entries)
            out << e.page_id << '\t' << sanitize_field(e.title) << '\t' << to_string(e.sample) << '\t' << e.ngram << '\n';
    }
    {
        auto out = open_output(dir / "quality_monthly.tsv");
        out << "page_id\tsample\tmonth\tquality\n";
        for (const auto& q : rep.inputs.quality_series)
            out << q.page_id << '\t' << to_string(q.sample) << '\t' << q.month << '\t' << format_double(q.quality) << '\n';
    }
    {
        auto out = open_output(dir / "contributors.tsv");
        out << "contributor\tever_edited_taboo\thas_user_page\tgender_specified\tfemale\temailable\n";
        for (const auto& c : rep.inputs.contributors)
            out << c.id << '\t' << c.ever_edited_taboo << '\t' << c.has_user_page << '\t' << c.gender_specified << '\t'
                << (c.female ? (*c.female ? "1" : "0") : "NA") << '\t' << c.emailable << '\n';
    }
    {
        auto out = open_output(dir / "tests.tsv");
        out << "section\thypothesis\tmeasure\ttest\tstatistic\tp_value\tsizes\tdirection\tstatus\n";
        for (const auto& s : rep.sections)
            for (const auto& t : s.tests) {
                std::string sizes;
                for (std::size_t i = 0; i < t.result.sizes.size(); ++i) sizes += (i ? "," : "") + std::to_string(t.result.sizes[i]);
                bool ok = t.status == "ok";
                out << s.id << '\t' << t.hypothesis << '\t' << t.label << '\t' << t.result.test_name << '\t'
                    << (ok ? format_double(t.result.statistic) : "NA") << '\t' << (ok ? format_double(t.result.p_value) : "NA")
                    << '\t' << sizes << '\t' << (ok ? std::to_string(t.result.direction) : "NA") << '\t' << t.status << '\n';
            }
    }
    for (const auto& s : rep.sections)
        for (const auto& r : s.regressions) {
            auto out = open_output(dir / (r.id + ".tsv"));
            write_regression_table(out, r);
        }
    {
        // Boxplot source: the five per-article panels.
        auto out = open_output(dir / "boxplot_source.tsv");
        out << "panel\tpage_id\tsample\tvalue\n";
        auto emit = [&](const char* panel, auto get) {
            for (const auto& a : rep.inputs.articles) {
                std::optional<double> v = get(a);
                if (v) out << panel << '\t' << a.page_id << '\t' << to_string(a.sample) << '\t' << format_double(*v) << '\n';
            }
        };
        emit("view_rank", [](const ArticleMetrics& a) { return a.mean_view_rank; });
        emit("contributions", [](const ArticleMetrics& a) { return std::optional<double>(static_cast<double>(a.n_contributions)); });
        emit("revert_rate", [](const ArticleMetrics& a) { return std::optional<double>(a.revert_rate); });
        emit("damaging_rate", [](const ArticleMetrics& a) { return std::optional<double>(a.damaging_rate); });
        emit("quality", [](const ArticleMetrics& a) { return a.mean_quality; });
    }
}

}  // namespace tabooscope
