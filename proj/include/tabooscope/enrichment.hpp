#pragma once

// Enrichment clients for revision scoring, contributor attributes and
// article categories, all behind a replayable on-disk response cache, plus
// pageview ingestion and within-month view ranking.
//
// Wire contract (live mode): POST <base>/<endpoint> with body
//   {"ids": ["<id>", ...]}
// answered by
//   {"results": {"<id>": <per-id body>, ...}}
// Ids absent from "results" are unavailable. Every per-id body is cached
// verbatim; fixture mode answers only from the cache and has no transport.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"

namespace tabooscope {

enum class ClientMode { live, fixture };

inline ClientMode parse_client_mode(std::string_view s) {
    if (s == "live") return ClientMode::live;
    if (s == "fixture") return ClientMode::fixture;
    throw ConfigError("client mode must be 'live' or 'fixture', got '" + std::string(s) + "'");
}

class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Transport {
  public:
    virtual ~Transport() = default;
    // Returns the response body; throws TransportError on failure.
    virtual std::string post(const std::string& endpoint, const std::string& body) = 0;
};

// Line-delimited cache: key <TAB> retrieved-at <TAB> compact JSON body.
class ResponseCache {
  public:
    struct Entry {
        std::string retrieved;
        std::string body;
    };

    ResponseCache() = default;

    // A missing file is an empty cache unless `must_exist`.
    explicit ResponseCache(std::filesystem::path path, bool must_exist = false) : path_(std::move(path)) {
        if (!std::filesystem::exists(path_)) {
            if (must_exist) throw ConfigError("cache file not found: " + path_.string());
            return;
        }
        auto in = open_input(path_);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto f = split(line, '\t');
            if (f.size() != 3) throw ParseError(path_.string() + ":" + std::to_string(line_no) + ": malformed cache line");
            entries_[std::string(f[0])] = {std::string(f[1]), std::string(f[2])};
        }
    }

    std::optional<Entry> get(const std::string& key) const {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void put(const std::string& key, const std::string& retrieved, const std::string& body) {
        std::lock_guard lock(mutex_);
        entries_[key] = {retrieved, body};
        if (path_.empty()) return;
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot append to cache " + path_.string());
        out << sanitize_field(key) << '\t' << retrieved << '\t' << body << '\n';
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

  private:
    std::filesystem::path path_;
    std::unordered_map<std::string, Entry> entries_;
    mutable std::mutex mutex_;
};

struct ClientOptions {
    std::size_t batch_size = 50;
    unsigned parallelism = 4;
    int max_retries = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::milliseconds min_interval{0};  // between requests to this endpoint
};

struct FetchedBody {
    nlohmann::json body;
    std::string retrieved;
};

class BatchClient {
  public:
    BatchClient(std::string endpoint, ClientMode mode, ResponseCache& cache, Transport* transport = nullptr,
                ClientOptions opt = {})
        : endpoint_(std::move(endpoint)), mode_(mode), cache_(cache), transport_(transport), opt_(opt) {
        if (mode_ == ClientMode::live && !transport_) throw ConfigError("live mode requires a transport");
    }

    const std::string& endpoint() const { return endpoint_; }

    // Resolves every id to a parsed body or nullopt (unavailable).
    std::map<std::string, std::optional<FetchedBody>> fetch(const std::vector<std::string>& ids) {
        std::map<std::string, std::optional<FetchedBody>> out;
        std::vector<std::string> missing;
        for (const auto& id : std::set<std::string>(ids.begin(), ids.end())) {
            if (auto hit = cache_.get(key(id))) {
                out[id] = parse_body(id, hit->body, hit->retrieved);
            } else {
                out[id] = std::nullopt;
                missing.push_back(id);
            }
        }
        if (mode_ == ClientMode::fixture) {
            if (!missing.empty())
                note(std::to_string(missing.size()) + " " + endpoint_ + " ids absent from fixture cache");
            return out;
        }

        std::vector<std::vector<std::string>> batches;
        for (std::size_t i = 0; i < missing.size(); i += opt_.batch_size)
            batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(i),
                                 missing.begin() + static_cast<std::ptrdiff_t>(std::min(missing.size(), i + opt_.batch_size)));
        std::vector<std::map<std::string, FetchedBody>> results(batches.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t b; (b = next++) < batches.size();) results[b] = request(batches[b]);
        };
        unsigned threads = std::max(1u, std::min<unsigned>(opt_.parallelism, static_cast<unsigned>(batches.size())));
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        for (auto& r : results)
            for (auto& [id, body] : r) out[id] = std::move(body);
        return out;
    }

    std::vector<std::string> log() const {
        std::lock_guard lock(log_mutex_);
        return log_;
    }

  private:
    std::string key(const std::string& id) const { return endpoint_ + ":" + id; }

    std::optional<FetchedBody> parse_body(const std::string& id, const std::string& text, const std::string& retrieved) {
        auto body = nlohmann::json::parse(text, nullptr, false);
        if (body.is_discarded()) {
            note(endpoint_ + " " + id + ": malformed cached body");
            return std::nullopt;
        }
        return FetchedBody{std::move(body), retrieved};
    }

    std::map<std::string, FetchedBody> request(const std::vector<std::string>& ids) {
        nlohmann::json req = {{"ids", ids}};
        std::string payload = req.dump();
        for (int attempt = 0;; ++attempt) {
            try {
                throttle();
                auto text = transport_->post(endpoint_, payload);
                auto resp = nlohmann::json::parse(text, nullptr, false);
                if (resp.is_discarded() || !resp.contains("results") || !resp["results"].is_object()) {
                    note(endpoint_ + ": malformed batch response; " + std::to_string(ids.size()) + " ids unavailable");
                    return {};
                }
                std::string now = format_instant(std::chrono::duration_cast<std::chrono::seconds>(
                                                     std::chrono::system_clock::now().time_since_epoch())
                                                     .count());
                std::map<std::string, FetchedBody> out;
                for (const auto& id : ids) {
                    if (!resp["results"].contains(id)) continue;
                    const auto& body = resp["results"][id];
                    cache_.put(key(id), now, body.dump());
                    out[id] = {body, now};
                }
                return out;
            } catch (const TransportError& e) {
                if (attempt >= opt_.max_retries) {
                    note(endpoint_ + ": giving up after " + std::to_string(attempt + 1) + " attempts (" + e.what() + ")");
                    return {};
                }
                std::this_thread::sleep_for(opt_.backoff * (1 << attempt));
            }
        }
    }

    void throttle() {
        if (opt_.min_interval.count() == 0) return;
        std::unique_lock lock(throttle_mutex_);
        auto now = std::chrono::steady_clock::now();
        if (now < next_slot_) std::this_thread::sleep_until(next_slot_);
        next_slot_ = std::max(now, next_slot_) + opt_.min_interval;
    }

    void note(std::string msg) {
        std::lock_guard lock(log_mutex_);
        log_.push_back(std::move(msg));
    }

    std::string endpoint_;
    ClientMode mode_;
    ResponseCache& cache_;
    Transport* transport_;
    ClientOptions opt_;
    std::mutex throttle_mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
    mutable std::mutex log_mutex_;
    std::vector<std::string> log_;
};

// ---------------------------------------------------------------------------
// Quality

inline constexpr std::array<const char*, 6> kQualityClasses{"Stub", "Start", "C", "B", "GA", "FA"};

struct QualityScore {
    std::int64_t revision_id = 0;
    std::array<double, 6> class_probabilities{};
    double scalar = 0.0;
};

// Expected class index with classes numbered 0 (lowest) to 5 (highest).
inline double quality_scalar(const std::array<double, 6>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += static_cast<double>(i) * p[i];
    return s;
}

// Accepts {"probabilities": [6 numbers]} or a class-name map under
// "probability" (optionally nested in "score"), as the ORES article-quality
// model returns.
inline std::optional<std::array<double, 6>> parse_quality_body(const nlohmann::json& body) {
    const nlohmann::json* node = &body;
    if (node->contains("score") && (*node)["score"].is_object()) node = &(*node)["score"];
    std::array<double, 6> p{};
    if (node->contains("probabilities") && (*node)["probabilities"].is_array()) {
        const auto& arr = (*node)["probabilities"];
        if (arr.size() != 6) return std::nullopt;
        for (std::size_t i = 0; i < 6; ++i) {
            if (!arr[i].is_number()) return std::nullopt;
            p[i] = arr[i].get<double>();
        }
    } else if (node->contains("probability") && (*node)["probability"].is_object()) {
        const auto& map = (*node)["probability"];
        for (std::size_t i = 0; i < 6; ++i) {
            if (!map.contains(kQualityClasses[i]) || !map[kQualityClasses[i]].is_number()) return std::nullopt;
            p[i] = map[kQualityClasses[i]].get<double>();
        }
    } else {
        return std::nullopt;
    }
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) return std::nullopt;
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6) return std::nullopt;
    return p;
}

struct ScoreLog {
    std::vector<std::int64_t> unavailable;
    std::vector<std::string> messages;
};

inline std::map<std::int64_t, QualityScore> score_quality(const std::vector<std::int64_t>& revision_ids,
                                                          BatchClient& client, ScoreLog* log = nullptr) {
    std::vector<std::string> ids;
    for (auto id : revision_ids) ids.push_back(std::to_string(id));
    auto fetched = client.fetch(ids);
    std::map<std::int64_t, QualityScore> out;
    for (auto& [id, body] : fetched) {
        auto rev = parse_int<std::int64_t>(id, "revision id");
        std::optional<std::array<double, 6>> probs;
        if (body) probs = parse_quality_body(body->body);
        if (!probs) {
            if (log) {
                log->unavailable.push_back(rev);
                if (body) log->messages.push_back("quality " + id + ": malformed response");
            }
            continue;
        }
        out[rev] = {rev, *probs, quality_scalar(*probs)};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Damaging

struct DamagingScore {
    std::int64_t revision_id = 0;
    double probability = 0.0;
    bool damaging = false;
};

// {"probability": p}, or {"probability": {"true": p, ...}} optionally nested in "score".
inline std::optional<double> parse_damaging_body(const nlohmann::json& body) {
    const nlohmann::json* node = &body;
    if (node->contains("score") && (*node)["score"].is_object()) node = &(*node)["score"];
    if (!node->contains("probability")) return std::nullopt;
    const auto& pr = (*node)["probability"];
    double p;
    if (pr.is_number())
        p = pr.get<double>();
    else if (pr.is_object() && pr.contains("true") && pr["true"].is_number())
        p = pr["true"].get<double>();
    else
        return std::nullopt;
    if (!(p >= 0.0 && p <= 1.0)) return std::nullopt;
    return p;
}

// damaging = probability >= threshold
inline std::map<std::int64_t, DamagingScore> score_damaging(const std::vector<std::int64_t>& revision_ids,
                                                            BatchClient& client, double threshold = 0.5,
                                                            ScoreLog* log = nullptr) {
    std::vector<std::string> ids;
    for (auto id : revision_ids) ids.push_back(std::to_string(id));
    auto fetched = client.fetch(ids);
    std::map<std::int64_t, DamagingScore> out;
    for (auto& [id, body] : fetched) {
        auto rev = parse_int<std::int64_t>(id, "revision id");
        std::optional<double> p;
        if (body) p = parse_damaging_body(body->body);
        if (!p) {
            if (log) {
                log->unavailable.push_back(rev);
                if (body) log->messages.push_back("damaging " + id + ": malformed response");
            }
            continue;
        }
        out[rev] = {rev, *p, *p >= threshold};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contributors

enum class Gender { female, male };

struct ContributorProfile {
    std::string name;
    bool has_user_page = false;
    bool gender_specified = false;
    std::optional<Gender> gender_value;
    bool emailable = false;
    bool ever_edited_taboo = false;
    std::string snapshot;  // when the attributes were retrieved
};

// Body: {"missing": bool, "gender": "female"|"male"|"unknown", "emailable": bool}.
// Names must be account names; anonymous contributors are never queried.
inline std::map<std::string, ContributorProfile> fetch_user_attributes(const std::vector<std::string>& names,
                                                                       BatchClient& client,
                                                                       std::vector<std::string>* log = nullptr) {
    auto fetched = client.fetch(names);
    std::map<std::string, ContributorProfile> out;
    for (auto& [name, body] : fetched) {
        ContributorProfile prof;
        prof.name = name;
        if (!body || !body->body.is_object()) {
            if (log) log->push_back("user profile unavailable; attributes set false");
            out[name] = prof;
            continue;
        }
        const auto& b = body->body;
        prof.snapshot = body->retrieved;
        if (b.value("missing", false) || b.value("suppressed", false)) {
            if (log) log->push_back("account missing or suppressed; attributes set false");
            out[name] = prof;
            continue;
        }
        auto gender = b.contains("gender") && b["gender"].is_string() ? b["gender"].get<std::string>() : "unknown";
        if (gender == "female") prof.gender_value = Gender::female;
        if (gender == "male") prof.gender_value = Gender::male;
        prof.gender_specified = prof.gender_value.has_value();
        prof.emailable = b.contains("emailable") && b["emailable"].is_boolean() && b["emailable"].get<bool>();
        out[name] = prof;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Categories

struct CategoryInfo {
    std::set<std::string> categories;
    bool in_scope = false;
};

inline constexpr std::string_view kDefaultProjectScope = "WikiProject Sexology and sexuality";

// Body: {"categories": [...], "talk_categories": [...]}; article and talk
// page categories are unioned. in_scope when any category mentions the
// project marker (case-insensitive).
inline std::map<std::string, CategoryInfo> fetch_categories(const std::vector<std::string>& titles, BatchClient& client,
                                                            std::string_view project_scope = kDefaultProjectScope,
                                                            std::vector<std::string>* log = nullptr) {
    auto fetched = client.fetch(titles);
    std::string marker = to_lower(project_scope);
    std::map<std::string, CategoryInfo> out;
    for (auto& [title, body] : fetched) {
        CategoryInfo info;
        if (body && body->body.is_object()) {
            for (const char* field : {"categories", "talk_categories"}) {
                if (!body->body.contains(field) || !body->body[field].is_array()) continue;
                for (const auto& c : body->body[field])
                    if (c.is_string()) info.categories.insert(c.get<std::string>());
            }
        } else if (log) {
            log->push_back("categories unavailable for a sampled article");
        }
        for (const auto& c : info.categories)
            if (to_lower(c).find(marker) != std::string::npos) info.in_scope = true;
        out[title] = std::move(info);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Views

struct MonthlyViews {
    std::int64_t page_id = 0;
    std::string month;  // YYYY-MM
    std::int64_t views = 0;
};

// Pageviews: (title or page id) <TAB> YYYY-MM <TAB> views. Rows naming pages
// outside `title_to_id` / `known_ids` are skipped and counted in the log.
inline std::vector<MonthlyViews> read_pageviews(std::istream& in, const std::map<std::string, std::int64_t>& title_to_id,
                                                const std::set<std::int64_t>& known_ids,
                                                std::vector<std::string>* log = nullptr) {
    std::map<std::pair<std::int64_t, std::string>, std::int64_t> merged;
    std::string line;
    std::size_t line_no = 0, skipped = 0, duplicates = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto f = split(line, '\t');
        if (f.size() != 3) throw ParseError("pageviews line " + std::to_string(line_no) + " is malformed");
        if (line_no == 1 && f[2] == "views") continue;
        std::optional<std::int64_t> id;
        if (auto it = title_to_id.find(canonical_title(f[0])); it != title_to_id.end()) {
            id = it->second;
        } else if (!f[0].empty() && std::all_of(f[0].begin(), f[0].end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            auto n = parse_int<std::int64_t>(f[0], "page id");
            if (known_ids.count(n)) id = n;
        }
        if (!id) {
            ++skipped;
            continue;
        }
        auto month = std::string(trim(f[1]));
        if (month.size() != 7 || month[4] != '-') throw ParseError("pageviews line " + std::to_string(line_no) + ": bad month");
        auto views = parse_int<std::int64_t>(f[2], "views");
        if (views < 0) throw ParseError("pageviews line " + std::to_string(line_no) + ": negative views");
        auto [it, inserted] = merged.emplace(std::make_pair(*id, month), views);
        if (!inserted) {
            it->second += views;
            ++duplicates;
        }
    }
    if (log) {
        if (skipped) log->push_back("pageviews: skipped " + std::to_string(skipped) + " rows for unsampled pages");
        if (duplicates) log->push_back("pageviews: summed " + std::to_string(duplicates) + " duplicate page-month rows");
    }
    std::vector<MonthlyViews> out;
    for (const auto& [key, v] : merged) out.push_back({key.first, key.second, v});
    return out;
}

// Within each month, articles are ranked by views descending (1 = most
// viewed, ties share the average rank); each article's result is its mean
// rank over the months in which it has a record. Articles in `expected`
// without any record are reported in the log.
inline std::map<std::int64_t, double> rank_views(const std::vector<MonthlyViews>& views,
                                                 const std::set<std::int64_t>& expected = {},
                                                 std::vector<std::string>* log = nullptr) {
    std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> by_month;
    for (const auto& v : views) by_month[v.month].emplace_back(v.page_id, v.views);
    std::map<std::int64_t, std::pair<double, std::size_t>> acc;
    for (auto& [month, rows] : by_month) {
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (std::size_t i = 0; i < rows.size();) {
            std::size_t j = i;
            while (j + 1 < rows.size() && rows[j + 1].second == rows[i].second) ++j;
            double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t k = i; k <= j; ++k) {
                auto& a = acc[rows[k].first];
                a.first += rank;
                ++a.second;
            }
            i = j + 1;
        }
    }
    std::map<std::int64_t, double> out;
    for (const auto& [id, a] : acc) out[id] = a.first / static_cast<double>(a.second);
    if (log)
        for (auto id : expected)
            if (!out.count(id)) log->push_back("article " + std::to_string(id) + " excluded from view ranks: no monthly data");
    return out;
}

// Transport that fails on contact and counts attempts.
class RefusingTransport : public Transport {
  public:
    std::string post(const std::string& endpoint, const std::string&) override {
        ++contacts;
        throw TransportError("network access refused (" + endpoint + ")");
    }
    std::atomic<int> contacts{0};
};

}  // namespace tabooscope
