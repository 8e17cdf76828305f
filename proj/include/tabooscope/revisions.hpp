#pragma once

// Revision analytics: bot filtering, identity-revert detection inside a
// forward window, contributor experience, protection spells and per-article
// aggregation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "dump_reader.hpp"

namespace tabooscope {

struct RevisionRecord {
    std::int64_t revision_id = 0;
    std::int64_t page_id = 0;
    Instant timestamp = 0;
    Contributor contributor;
    std::string checksum;
    bool is_reverted = false;
    std::optional<bool> is_damaging;
    std::int64_t editor_nth_edit = 1;
};

inline bool revision_order(const RevisionRecord& a, const RevisionRecord& b) {
    if (a.page_id != b.page_id) return a.page_id < b.page_id;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.revision_id < b.revision_id;
}

// ---------------------------------------------------------------------------
// Bots

// Canonical account-name form used for bot lookups.
inline std::string canonical_user(std::string_view name) { return canonical_title(name); }

// Union of the configured bot lists. Each line holds a name, optionally
// followed by tab-separated columns that are ignored.
inline std::unordered_set<std::string> load_bot_names(const std::vector<std::filesystem::path>& files) {
    std::unordered_set<std::string> names;
    for (const auto& f : files) {
        if (!std::filesystem::exists(f)) throw ConfigError("bot list not found: " + f.string());
        for (const auto& line : read_word_list(f)) {
            auto name = split(line, '\t').front();
            if (!trim(name).empty()) names.insert(canonical_user(name));
        }
    }
    return names;
}

inline std::vector<RevisionRecord> filter_bots(const std::vector<RevisionRecord>& revisions,
                                               const std::unordered_set<std::string>& bot_names) {
    std::vector<RevisionRecord> kept;
    kept.reserve(revisions.size());
    for (const auto& r : revisions) {
        if (r.contributor.kind == ContributorKind::bot) continue;
        if (r.contributor.kind == ContributorKind::account && bot_names.count(canonical_user(r.contributor.name)))
            continue;
        kept.push_back(r);
    }
    return kept;
}

// ---------------------------------------------------------------------------
// Reverts

// Single pass over one page's checksums. Revision r is reverted when some
// later revision j with r < j <= r + window restores a checksum that existed
// before r. A revision's flag is final once `window` further revisions have
// been pushed (or at finish()).
class RevertScanner {
  public:
    explicit RevertScanner(std::size_t window) : window_(window) {}

    // Returns flags for revisions that became final, in order.
    std::vector<bool> push(const std::string& checksum) {
        std::size_t j = next_++;
        auto [it, inserted] = first_seen_.emplace(checksum, j);
        pending_.push_back(false);
        if (!inserted) {
            std::size_t first = it->second;
            std::size_t lo = std::max(first + 1, j >= window_ ? j - window_ : 0);
            for (std::size_t r = lo; r < j; ++r) pending_[r - base_] = true;
        }
        std::vector<bool> done;
        while (!pending_.empty() && base_ + window_ < next_) {
            done.push_back(pending_.front());
            pending_.pop_front();
            ++base_;
        }
        return done;
    }

    std::vector<bool> finish() {
        std::vector<bool> done(pending_.begin(), pending_.end());
        base_ += pending_.size();
        pending_.clear();
        return done;
    }

  private:
    std::size_t window_;
    std::size_t next_ = 0;
    std::size_t base_ = 0;  // index of pending_.front()
    std::deque<bool> pending_;
    std::unordered_map<std::string, std::size_t> first_seen_;
};

inline std::vector<bool> detect_reverts(const std::vector<std::string>& checksums, std::size_t window = 10) {
    RevertScanner scanner(window);
    std::vector<bool> flags;
    flags.reserve(checksums.size());
    for (const auto& c : checksums) {
        auto done = scanner.push(c);
        flags.insert(flags.end(), done.begin(), done.end());
    }
    auto rest = scanner.finish();
    flags.insert(flags.end(), rest.begin(), rest.end());
    return flags;
}

// Annotates is_reverted on revisions that must all belong to one page, in order.
inline void annotate_reverts(std::vector<RevisionRecord>& page_revisions, std::size_t window = 10) {
    std::vector<std::string> sums;
    sums.reserve(page_revisions.size());
    for (const auto& r : page_revisions) sums.push_back(r.checksum);
    auto flags = detect_reverts(sums, window);
    for (std::size_t i = 0; i < flags.size(); ++i) page_revisions[i].is_reverted = flags[i];
}

// ---------------------------------------------------------------------------
// Experience

inline std::string contributor_key(const Contributor& c) {
    switch (c.kind) {
        case ContributorKind::account: return "u:" + canonical_user(c.name);
        case ContributorKind::bot: return "b:" + canonical_user(c.name);
        case ContributorKind::anonymous: return "ip:" + c.name;
    }
    return {};
}

// Numbers each contributor's revisions 1..n in (timestamp, revision id)
// order across the whole set. Suppressed contributors cannot be linked and
// get 1.
inline void compute_experience(std::vector<RevisionRecord>& revisions) {
    std::vector<std::size_t> order(revisions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = revisions[a];
        const auto& y = revisions[b];
        if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
        return x.revision_id < y.revision_id;
    });
    std::unordered_map<std::string, std::int64_t> counts;
    for (auto i : order) {
        auto& r = revisions[i];
        if (r.contributor.suppressed) {
            r.editor_nth_edit = 1;
            continue;
        }
        r.editor_nth_edit = ++counts[contributor_key(r.contributor)];
    }
}

// ---------------------------------------------------------------------------
// Protection

enum class ProtectionAction { protect, unprotect, modify };

struct ProtectionEvent {
    std::int64_t page_id = 0;
    Instant timestamp = 0;
    ProtectionAction action = ProtectionAction::protect;
    std::string level;
    std::optional<Instant> expiry;
};

struct ProtectionSpell {
    std::int64_t page_id = 0;
    Instant start = 0;
    std::optional<Instant> end;  // open spell when empty
    std::string level;

    friend bool operator==(const ProtectionSpell&, const ProtectionSpell&) = default;
};

// True when the level string restricts editing. Accepts MediaWiki log forms
// such as "edit=autoconfirmed:move=sysop", "[edit=sysop] (indefinite)" or a
// bare group name. Move-only and create-only protection do not count.
inline bool restricts_edit(std::string_view level) {
    std::string lower = to_lower(level);
    auto pos = lower.find("edit=");
    if (pos == std::string::npos) {
        if (lower.find("move=") != std::string::npos || lower.find("create=") != std::string::npos ||
            lower.find("upload=") != std::string::npos)
            return false;
        auto bare = trim(lower);
        return !bare.empty() && bare != "all" && bare != "*" && bare != "none";
    }
    auto start = pos + 5;
    auto stop = lower.find_first_of(":] ,)", start);
    auto value = lower.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    return !value.empty() && value != "all" && value != "*";
}

struct SpellBuild {
    std::vector<ProtectionSpell> spells;
    std::vector<std::string> log;
};

namespace detail {

inline std::vector<ProtectionSpell> merge_spells(std::vector<ProtectionSpell> spells) {
    std::sort(spells.begin(), spells.end(), [](const auto& a, const auto& b) {
        if (a.page_id != b.page_id) return a.page_id < b.page_id;
        return a.start < b.start;
    });
    std::vector<ProtectionSpell> merged;
    for (auto& s : spells) {
        if (!merged.empty() && merged.back().page_id == s.page_id) {
            auto& prev = merged.back();
            if (!prev.end || s.start <= *prev.end) {
                if (prev.end && (!s.end || *s.end > *prev.end)) prev.end = s.end;
                continue;
            }
        }
        merged.push_back(std::move(s));
    }
    return merged;
}

}  // namespace detail

// Pairs each edit-restricting protect with the next unprotect (or expiry,
// or a modify that lifts edit restrictions). Spells left open have no end.
inline SpellBuild build_protection_spells(std::vector<ProtectionEvent> events) {
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.page_id != b.page_id) return a.page_id < b.page_id;
        return a.timestamp < b.timestamp;
    });
    SpellBuild out;
    std::vector<ProtectionSpell> raw;
    std::optional<ProtectionSpell> open;
    std::optional<Instant> open_expiry;
    auto close = [&](Instant at) {
        open->end = at;
        if (*open->end > open->start) raw.push_back(*open);
        open.reset();
        open_expiry.reset();
    };
    auto flush_page = [&] {
        if (!open) return;
        if (open_expiry)
            close(*open_expiry);
        else {
            raw.push_back(*open);
            open.reset();
        }
    };
    std::optional<std::int64_t> page;
    for (const auto& e : events) {
        if (page != e.page_id) {
            flush_page();
            page = e.page_id;
        }
        if (open && open_expiry && *open_expiry <= e.timestamp) close(*open_expiry);
        switch (e.action) {
            case ProtectionAction::protect:
            case ProtectionAction::modify:
                if (restricts_edit(e.level)) {
                    if (!open) open = ProtectionSpell{e.page_id, e.timestamp, std::nullopt, e.level};
                    else open->level = e.level;
                    open_expiry = e.expiry;
                } else if (open) {
                    close(e.timestamp);
                }
                break;
            case ProtectionAction::unprotect:
                if (open)
                    close(e.timestamp);
                else
                    out.log.push_back("page " + std::to_string(e.page_id) + ": unprotect at " +
                                      format_instant(e.timestamp) + " without an open spell; ignored");
                break;
        }
    }
    flush_page();
    out.spells = detail::merge_spells(std::move(raw));
    return out;
}

// Share of [cutoff, horizon] covered by the spells (of a single page).
inline double protected_proportion(const std::vector<ProtectionSpell>& spells, Instant cutoff, Instant horizon) {
    if (horizon <= cutoff) throw std::invalid_argument("protected_proportion: horizon must be after cutoff");
    auto merged = detail::merge_spells(spells);
    double covered = 0.0;
    for (const auto& s : merged) {
        Instant lo = std::max(s.start, cutoff);
        Instant hi = std::min(s.end.value_or(horizon), horizon);
        if (hi > lo) covered += static_cast<double>(hi - lo);
    }
    return covered / static_cast<double>(horizon - cutoff);
}

inline ProtectionAction parse_protection_action(std::string_view s) {
    if (s == "protect") return ProtectionAction::protect;
    if (s == "unprotect") return ProtectionAction::unprotect;
    if (s == "modify") return ProtectionAction::modify;
    throw ParseError("unknown protection action '" + std::string(s) + "'");
}

// Protection log: page_id, timestamp, action, level[, expiry]. Expiry may be
// empty or "infinity".
inline std::vector<ProtectionEvent> read_protection_log(std::istream& in) {
    std::vector<ProtectionEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#' || (line_no == 1 && line.rfind("page_id\t", 0) == 0)) continue;
        auto f = split(line, '\t');
        if (f.size() < 3 || f.size() > 5)
            throw ParseError("protection log line " + std::to_string(line_no) + " is malformed");
        ProtectionEvent e;
        e.page_id = parse_int<std::int64_t>(f[0], "page id");
        e.timestamp = parse_instant(f[1]);
        e.action = parse_protection_action(f[2]);
        if (f.size() > 3) e.level = std::string(f[3]);
        if (f.size() > 4) {
            auto exp = trim(f[4]);
            if (!exp.empty() && exp != "infinity" && exp != "infinite" && exp != "indefinite")
                e.expiry = parse_instant(exp);
        }
        events.push_back(std::move(e));
    }
    return events;
}

// ---------------------------------------------------------------------------
// Revision files

inline std::string format_contributor(const Contributor& c) {
    if (c.suppressed) return "deleted";
    switch (c.kind) {
        case ContributorKind::account: return "user:" + c.name;
        case ContributorKind::bot: return "bot:" + c.name;
        case ContributorKind::anonymous: return "ip:" + c.name;
    }
    return "deleted";
}

inline Contributor parse_contributor(std::string_view s) {
    if (s == "deleted") return {ContributorKind::anonymous, "", true};
    if (s.rfind("user:", 0) == 0) return {ContributorKind::account, std::string(s.substr(5)), false};
    if (s.rfind("ip:", 0) == 0) return {ContributorKind::anonymous, std::string(s.substr(3)), false};
    if (s.rfind("bot:", 0) == 0) return {ContributorKind::bot, std::string(s.substr(4)), false};
    throw ParseError("unknown contributor '" + std::string(s) + "'");
}

// Simplified revision fixture: page_id, revision_id, timestamp, contributor, checksum.
inline std::vector<RevisionRecord> read_revision_fixture(std::istream& in) {
    std::vector<RevisionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#' || (line_no == 1 && line.rfind("page_id\t", 0) == 0)) continue;
        auto f = split(line, '\t');
        if (f.size() != 5) throw ParseError("revision fixture line " + std::to_string(line_no) + " is malformed");
        RevisionRecord r;
        r.page_id = parse_int<std::int64_t>(f[0], "page id");
        r.revision_id = parse_int<std::int64_t>(f[1], "revision id");
        r.timestamp = parse_instant(f[2]);
        r.contributor = parse_contributor(f[3]);
        r.checksum = std::string(f[4]);
        out.push_back(std::move(r));
    }
    return out;
}

// Annotated revisions: the analyze stage output.
inline void write_revisions(std::ostream& out, const std::vector<RevisionRecord>& revs) {
    out << "page_id\trevision_id\ttimestamp\tcontributor\tchecksum\treverted\tnth_edit\n";
    for (const auto& r : revs)
        out << r.page_id << '\t' << r.revision_id << '\t' << format_instant(r.timestamp) << '\t'
            << sanitize_field(format_contributor(r.contributor)) << '\t' << r.checksum << '\t'
            << (r.is_reverted ? 1 : 0) << '\t' << r.editor_nth_edit << '\n';
}

inline std::vector<RevisionRecord> read_revisions(std::istream& in) {
    std::vector<RevisionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("page_id\t", 0) == 0)) continue;
        auto f = split(line, '\t');
        if (f.size() != 7) throw ParseError("revisions line " + std::to_string(line_no) + " is malformed");
        RevisionRecord r;
        r.page_id = parse_int<std::int64_t>(f[0], "page id");
        r.revision_id = parse_int<std::int64_t>(f[1], "revision id");
        r.timestamp = parse_instant(f[2]);
        r.contributor = parse_contributor(f[3]);
        r.checksum = std::string(f[4]);
        r.is_reverted = f[5] == "1";
        r.editor_nth_edit = parse_int<std::int64_t>(f[6], "nth edit");
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analysis over a dump

struct AnalysisConfig {
    std::size_t window = 10;
    Instant cutoff = parse_instant("2008-01-01");
    Instant horizon = parse_instant("2022-12-31");
};

struct RevisionAnalysis {
    std::vector<RevisionRecord> revisions;  // human revisions, sampled pages, sorted by revision_order
    std::map<std::int64_t, std::vector<ProtectionSpell>> spells;
    std::map<std::int64_t, double> protected_proportion;
    std::map<std::string, Instant> user_page_created;  // canonical user name -> first revision of User: page
    std::vector<std::string> log;
};

// Bot filtering, revert annotation, experience numbering and protection
// proportions for the pages in `sampled` (page ids).
inline RevisionAnalysis analyze_revisions(std::vector<RevisionRecord> revisions,
                                          const std::set<std::int64_t>& sampled,
                                          const std::unordered_set<std::string>& bots,
                                          const std::vector<ProtectionEvent>& protection,
                                          const AnalysisConfig& cfg) {
    RevisionAnalysis out;
    std::erase_if(revisions, [&](const RevisionRecord& r) { return !sampled.count(r.page_id); });
    std::size_t before = revisions.size();
    revisions = filter_bots(revisions, bots);
    out.log.push_back("bot filter removed " + std::to_string(before - revisions.size()) + " of " +
                      std::to_string(before) + " revisions");
    std::sort(revisions.begin(), revisions.end(), revision_order);

    for (std::size_t i = 0; i < revisions.size();) {
        std::size_t j = i;
        while (j < revisions.size() && revisions[j].page_id == revisions[i].page_id) ++j;
        std::vector<RevisionRecord> page(revisions.begin() + static_cast<std::ptrdiff_t>(i),
                                         revisions.begin() + static_cast<std::ptrdiff_t>(j));
        annotate_reverts(page, cfg.window);
        std::copy(page.begin(), page.end(), revisions.begin() + static_cast<std::ptrdiff_t>(i));
        i = j;
    }
    compute_experience(revisions);
    out.revisions = std::move(revisions);

    std::vector<ProtectionEvent> relevant;
    for (const auto& e : protection)
        if (sampled.count(e.page_id)) relevant.push_back(e);
    auto built = build_protection_spells(std::move(relevant));
    out.log.insert(out.log.end(), built.log.begin(), built.log.end());
    for (auto& s : built.spells) out.spells[s.page_id].push_back(s);
    for (auto id : sampled) {
        auto it = out.spells.find(id);
        out.protected_proportion[id] =
            it == out.spells.end() ? 0.0 : protected_proportion(it->second, cfg.cutoff, cfg.horizon);
    }
    return out;
}

// Reads a pages-meta-history export. Revisions are kept for `sampled` pages
// (namespace 0); for namespace 2 only the first revision time of each user
// page is recorded.
struct DumpScan {
    std::vector<RevisionRecord> revisions;
    std::vector<PageInfo> pages;  // namespace-0 page metadata
    std::map<std::string, Instant> user_page_created;
};

inline DumpScan scan_dump(std::istream& in, const std::set<std::int64_t>* sampled) {
    DumpScan out;
    auto keep = [&](int ns, std::int64_t id, const std::string&) {
        if (ns == 2) return true;
        return ns == 0 && (!sampled || sampled->count(id) > 0);
    };
    DumpReader reader(
        [&](DumpPage&& page) {
            if (page.ns == 2) {
                if (page.revisions.empty()) return;
                std::string name = page.title;
                if (auto colon = name.find(':'); colon != std::string::npos) name = name.substr(colon + 1);
                if (name.find('/') != std::string::npos) return;  // subpages are not profiles
                Instant first = page.revisions.front().timestamp;
                for (const auto& r : page.revisions) first = std::min(first, r.timestamp);
                auto key = canonical_user(name);
                auto [it, inserted] = out.user_page_created.emplace(key, first);
                if (!inserted) it->second = std::min(it->second, first);
                return;
            }
            if (page.ns != 0) return;
            out.pages.push_back({page.page_id, page.title, page.redirect, page.markers});
            for (auto& r : page.revisions) {
                RevisionRecord rec;
                rec.revision_id = r.revision_id;
                rec.page_id = page.page_id;
                rec.timestamp = r.timestamp;
                rec.contributor = std::move(r.contributor);
                rec.checksum = std::move(r.checksum);
                out.revisions.push_back(std::move(rec));
            }
        },
        keep);
    reader.parse(in);
    return out;
}

inline void write_spells(std::ostream& out, const std::map<std::int64_t, std::vector<ProtectionSpell>>& spells) {
    out << "page_id\tstart\tend\tlevel\n";
    for (const auto& [id, list] : spells)
        for (const auto& s : list)
            out << id << '\t' << format_instant(s.start) << '\t' << (s.end ? format_instant(*s.end) : "open") << '\t'
                << sanitize_field(s.level) << '\n';
}

inline void write_proportions(std::ostream& out, const std::map<std::int64_t, double>& props) {
    out << "page_id\tprotected_proportion\n";
    for (const auto& [id, p] : props) out << id << '\t' << format_double(p) << '\n';
}

inline std::map<std::int64_t, double> read_proportions(std::istream& in) {
    std::map<std::int64_t, double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("page_id\t", 0) == 0)) continue;
        auto f = split(line, '\t');
        if (f.size() != 2) throw ParseError("proportion line " + std::to_string(line_no) + " is malformed");
        out[parse_int<std::int64_t>(f[0], "page id")] = parse_double(f[1]);
    }
    return out;
}

inline void write_user_pages(std::ostream& out, const std::map<std::string, Instant>& created) {
    out << "user\tcreated\n";
    for (const auto& [name, t] : created) out << sanitize_field(name) << '\t' << format_instant(t) << '\n';
}

inline std::map<std::string, Instant> read_user_pages(std::istream& in) {
    std::map<std::string, Instant> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("user\t", 0) == 0)) continue;
        auto f = split(line, '\t');
        if (f.size() != 2) throw ParseError("user page line " + std::to_string(line_no) + " is malformed");
        out[std::string(f[0])] = parse_instant(f[1]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct ArticleMetrics {
    std::int64_t page_id = 0;
    Sample sample = Sample::comparison;
    std::int64_t n_contributions = 0;
    std::int64_t revert_count = 0;
    std::int64_t damaging_count = 0;
    double revert_rate = 0.0;
    double damaging_rate = 0.0;
    std::optional<double> mean_quality;
    std::optional<double> mean_view_rank;
    double protected_proportion = 0.0;
    std::optional<double> mean_editor_experience;
    double share_no_account = 0.0;
};

struct ArticleEnrichment {
    std::map<std::int64_t, double> mean_view_rank;
    std::map<std::int64_t, double> mean_quality;
    std::map<std::int64_t, double> protected_proportion;
};

struct Aggregation {
    std::vector<ArticleMetrics> articles;  // manifest order
    std::vector<std::string> log;
};

// `revisions` must carry revert, experience and damaging annotations.
inline Aggregation aggregate_article_metrics(const std::vector<RevisionRecord>& revisions,
                                             const SampleManifest& manifest, const ArticleEnrichment& enrich) {
    std::map<std::int64_t, std::vector<const RevisionRecord*>> by_page;
    for (const auto& r : revisions) by_page[r.page_id].push_back(&r);
    Aggregation out;
    for (const auto& entry : manifest.entries) {
        auto it = by_page.find(entry.page_id);
        if (it == by_page.end() || it->second.empty()) {
            out.log.push_back("article " + std::to_string(entry.page_id) + " excluded: no human revisions");
            continue;
        }
        ArticleMetrics m;
        m.page_id = entry.page_id;
        m.sample = entry.sample;
        double exp_sum = 0.0;
        std::int64_t exp_n = 0, no_account = 0;
        for (const auto* r : it->second) {
            ++m.n_contributions;
            if (r->is_reverted) ++m.revert_count;
            if (r->is_damaging.value_or(false)) ++m.damaging_count;
            if (r->contributor.kind != ContributorKind::account) ++no_account;
            if (!r->contributor.suppressed) {
                exp_sum += static_cast<double>(r->editor_nth_edit);
                ++exp_n;
            }
        }
        auto n = static_cast<double>(m.n_contributions);
        m.revert_rate = static_cast<double>(m.revert_count) / n;
        m.damaging_rate = static_cast<double>(m.damaging_count) / n;
        m.share_no_account = static_cast<double>(no_account) / n;
        if (exp_n > 0) m.mean_editor_experience = exp_sum / static_cast<double>(exp_n);
        if (auto v = enrich.mean_view_rank.find(m.page_id); v != enrich.mean_view_rank.end())
            m.mean_view_rank = v->second;
        if (auto q = enrich.mean_quality.find(m.page_id); q != enrich.mean_quality.end())
            m.mean_quality = q->second;
        if (auto p = enrich.protected_proportion.find(m.page_id); p != enrich.protected_proportion.end())
            m.protected_proportion = p->second;
        out.articles.push_back(m);
    }
    return out;
}

// Latest revision in each calendar month with edits, per page:
// page id -> [(YYYY-MM, revision id)] in month order.
inline std::map<std::int64_t, std::vector<std::pair<std::string, std::int64_t>>> month_end_revisions(
    const std::vector<RevisionRecord>& revisions) {
    std::map<std::int64_t, std::map<std::string, std::pair<Instant, std::int64_t>>> latest;
    for (const auto& r : revisions) {
        auto& slot = latest[r.page_id][month_of(r.timestamp)];
        if (std::make_pair(r.timestamp, r.revision_id) >= slot) slot = {r.timestamp, r.revision_id};
    }
    std::map<std::int64_t, std::vector<std::pair<std::string, std::int64_t>>> out;
    for (const auto& [page, months] : latest)
        for (const auto& [month, rev] : months) out[page].emplace_back(month, rev.second);
    return out;
}

inline std::string next_month(const std::string& ym) {
    int y = parse_int<int>(std::string_view(ym).substr(0, 4));
    int m = parse_int<int>(std::string_view(ym).substr(5, 2));
    if (++m > 12) {
        m = 1;
        ++y;
    }
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d", y, m);
    return buf.data();
}

struct MonthlyQuality {
    std::string month;
    double quality = 0.0;
};

// Per-month article quality from the first to the last edited month; months
// without edits carry the previous month's value forward. Months before the
// first scored revision are omitted.
inline std::vector<MonthlyQuality> monthly_quality_series(
    const std::vector<std::pair<std::string, std::int64_t>>& month_ends,
    const std::map<std::int64_t, double>& quality_by_revision) {
    std::vector<MonthlyQuality> series;
    if (month_ends.empty()) return series;
    std::optional<double> current;
    std::size_t k = 0;
    for (std::string month = month_ends.front().first; month <= month_ends.back().first; month = next_month(month)) {
        if (k < month_ends.size() && month_ends[k].first == month) {
            if (auto q = quality_by_revision.find(month_ends[k].second); q != quality_by_revision.end())
                current = q->second;
            ++k;
        }
        if (current) series.push_back({month, *current});
    }
    return series;
}

}  // namespace tabooscope
