#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tabooscope/enrichment.hpp"

using namespace tabooscope;

namespace {

// Answers every id from a fixed table after failing `failures` times.
class FlakyTransport : public Transport {
  public:
    FlakyTransport(std::map<std::string, nlohmann::json> table, int failures)
        : table_(std::move(table)), failures_(failures) {}

    std::string post(const std::string&, const std::string& body) override {
        ++calls;
        if (failures_-- > 0) throw TransportError("connection reset");
        auto req = nlohmann::json::parse(body);
        nlohmann::json results = nlohmann::json::object();
        for (const auto& id : req["ids"]) {
            auto key = id.get<std::string>();
            if (auto it = table_.find(key); it != table_.end()) results[key] = it->second;
        }
        return nlohmann::json{{"results", results}}.dump();
    }

    int calls = 0;

  private:
    std::map<std::string, nlohmann::json> table_;
    int failures_;
};

ClientOptions fast() {
    ClientOptions o;
    o.backoff = std::chrono::milliseconds(1);
    o.parallelism = 1;
    return o;
}

ResponseCache cache_with(const oracle::TempDir& dir, const std::string& lines) {
    auto p = dir.path / "cache.tsv";
    std::ofstream(p) << lines;
    return ResponseCache(p, true);
}

}  // namespace

TEST(Quality, Scalar) {
    EXPECT_DOUBLE_EQ(quality_scalar({1, 0, 0, 0, 0, 0}), 0.0);
    std::array<double, 6> uniform;
    uniform.fill(1.0 / 6.0);
    EXPECT_NEAR(quality_scalar(uniform), 2.5, 1e-12);
    EXPECT_DOUBLE_EQ(quality_scalar({0, 0, 0, 0, 0, 1}), 5.0);
}

TEST(Quality, MassTowardHigherClassRaisesScalar) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 6> p{};
        double s = 0;
        for (auto& v : p) s += (v = u(rng));
        for (auto& v : p) v /= s;
        auto i = rng() % 5;
        auto moved = p;
        double delta = moved[i] * u(rng);
        moved[i] -= delta;
        moved[i + 1 + rng() % (5 - i)] += delta;
        EXPECT_GE(quality_scalar(moved), quality_scalar(p) - 1e-12);
        EXPECT_GE(quality_scalar(p), 0.0);
        EXPECT_LE(quality_scalar(p), 5.0);
    }
}

TEST(Quality, ParseBodies) {
    auto a = parse_quality_body(nlohmann::json::parse(R"({"probabilities":[0,0,0,0,0,1]})"));
    ASSERT_TRUE(a);
    EXPECT_EQ((*a)[5], 1.0);
    auto b = parse_quality_body(nlohmann::json::parse(
        R"({"score":{"probability":{"Stub":0.5,"Start":0.5,"C":0,"B":0,"GA":0,"FA":0}}})"));
    ASSERT_TRUE(b);
    EXPECT_DOUBLE_EQ(quality_scalar(*b), 0.5);
    EXPECT_FALSE(parse_quality_body(nlohmann::json::parse(R"({"probabilities":[1,2]})")));
}

TEST(Damaging, ThresholdIsInclusive) {
    oracle::TempDir dir("damaging");
    auto cache = cache_with(dir, "damaging:1\tt\t{\"probability\":0.0}\n"
                                 "damaging:2\tt\t{\"probability\":0.5}\n"
                                 "damaging:3\tt\t{\"probability\":{\"true\":0.49}}\n"
                                 "damaging:4\tt\t{\"probability\":\"high\"}\n");
    BatchClient client("damaging", ClientMode::fixture, cache);
    ScoreLog log;
    auto s = score_damaging({1, 2, 3, 4, 5}, client, 0.5, &log);
    EXPECT_FALSE(s.at(1).damaging);
    EXPECT_TRUE(s.at(2).damaging);
    EXPECT_FALSE(s.at(3).damaging);
    EXPECT_EQ(s.count(4), 0u);
    EXPECT_EQ(s.count(5), 0u);
    EXPECT_EQ(log.unavailable, (std::vector<std::int64_t>{4, 5}));
}

TEST(Users, EmailableRoundTrip) {
    oracle::TempDir dir("users");
    auto cache = cache_with(dir, "users:Alice\t2022-06-01T00:00:00Z\t{\"gender\":\"female\",\"emailable\":true}\n"
                                 "users:Bob\t2022-06-01T00:00:00Z\t{\"gender\":\"unknown\",\"emailable\":false}\n"
                                 "users:Gone\t2022-06-01T00:00:00Z\t{\"missing\":true,\"emailable\":true}\n");
    BatchClient client("users", ClientMode::fixture, cache);
    std::vector<std::string> log;
    auto p = fetch_user_attributes({"Alice", "Bob", "Gone"}, client, &log);
    EXPECT_TRUE(p.at("Alice").emailable);
    EXPECT_EQ(p.at("Alice").gender_value, Gender::female);
    EXPECT_TRUE(p.at("Alice").gender_specified);
    EXPECT_EQ(p.at("Alice").snapshot, "2022-06-01T00:00:00Z");
    EXPECT_FALSE(p.at("Bob").emailable);
    EXPECT_FALSE(p.at("Bob").gender_specified);
    EXPECT_FALSE(p.at("Gone").emailable);
    EXPECT_EQ(log.size(), 1u);
}

TEST(Categories, ProjectScope) {
    oracle::TempDir dir("cats");
    auto cache = cache_with(
        dir, "categories:Sex\tt\t{\"categories\":[\"Human behavior\"],\"talk_categories\":[\"WikiProject Sexology and sexuality articles\"]}\n"
             "categories:Bread\tt\t{\"categories\":[],\"talk_categories\":[]}\n");
    BatchClient client("categories", ClientMode::fixture, cache);
    auto c = fetch_categories({"Sex", "Bread"}, client);
    EXPECT_TRUE(c.at("Sex").in_scope);
    EXPECT_EQ(c.at("Sex").categories.size(), 2u);
    EXPECT_FALSE(c.at("Bread").in_scope);
    EXPECT_TRUE(c.at("Bread").categories.empty());
}

TEST(Views, HandRanks) {
    auto single = rank_views({{1, "2020-01", 10}});
    EXPECT_DOUBLE_EQ(single.at(1), 1.0);
    auto two = rank_views({{1, "m1", 10}, {2, "m1", 5}, {1, "m2", 1}, {2, "m2", 2}});
    EXPECT_DOUBLE_EQ(two.at(1), 1.5);
    EXPECT_DOUBLE_EQ(two.at(2), 1.5);
    std::vector<std::string> log;
    rank_views({{1, "m1", 3}}, {1, 2}, &log);
    ASSERT_EQ(log.size(), 1u);
}

TEST(Views, PermutationInvariantAndRanksArePermutation) {
    std::mt19937 rng(21);
    std::vector<MonthlyViews> v;
    for (int m = 0; m < 6; ++m)
        for (int a = 1; a <= 12; ++a) v.push_back({a, "2020-0" + std::to_string(m + 1), static_cast<std::int64_t>(rng() % 10000)});
    auto base = rank_views(v);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(v.begin(), v.end(), rng);
        EXPECT_EQ(rank_views(v), base);
    }
    // Within a month with distinct counts, ranks are exactly 1..n.
    std::vector<MonthlyViews> month;
    for (int a = 1; a <= 9; ++a) month.push_back({a, "2020-01", a * 7});
    auto r = rank_views(month);
    std::vector<double> got;
    for (auto& [id, x] : r) got.push_back(x);
    std::sort(got.begin(), got.end());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], static_cast<double>(i + 1));
}

TEST(Views, ReadPageviews) {
    std::istringstream in("page\tmonth\tviews\nDeath\t2020-01\t10\n10\t2020-01\t5\nUnknown\t2020-01\t3\n");
    std::vector<std::string> log;
    auto rows = read_pageviews(in, {{"Death", 10}}, {10}, &log);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].views, 15);
    EXPECT_EQ(log.size(), 2u);
}

TEST(Client, FixtureModeNeverContactsNetwork) {
    oracle::TempDir dir("fixture");
    auto cache = cache_with(dir, "damaging:1\tt\t{\"probability\":0.9}\n");
    RefusingTransport refuse;
    BatchClient client("damaging", ClientMode::fixture, cache, &refuse);
    auto s = score_damaging({1, 2, 3}, client);
    EXPECT_EQ(refuse.contacts.load(), 0);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_FALSE(client.log().empty());
}

TEST(Client, LiveModeRetriesThenCaches) {
    oracle::TempDir dir("live");
    auto path = dir.path / "cache.tsv";
    FlakyTransport t({{"7", {{"probability", 0.75}}}, {"8", {{"probability", 0.25}}}}, 2);
    {
        ResponseCache cache(path);
        BatchClient client("damaging", ClientMode::live, cache, &t, fast());
        auto s = score_damaging({7, 8}, client);
        EXPECT_EQ(t.calls, 3);
        EXPECT_TRUE(s.at(7).damaging);
        EXPECT_FALSE(s.at(8).damaging);
    }
    // Replay from the appended cache without a network.
    ResponseCache replay(path, true);
    EXPECT_EQ(replay.size(), 2u);
    BatchClient offline("damaging", ClientMode::fixture, replay);
    EXPECT_EQ(score_damaging({7, 8}, offline).size(), 2u);
}

TEST(Client, LiveModeGivesUpAfterBoundedRetries) {
    oracle::TempDir dir("giveup");
    ResponseCache cache(dir.path / "cache.tsv");
    FlakyTransport t({}, 100);
    BatchClient client("articlequality", ClientMode::live, cache, &t, fast());
    ScoreLog log;
    auto s = score_quality({1}, client, &log);
    EXPECT_TRUE(s.empty());
    EXPECT_EQ(t.calls, 4);
    EXPECT_EQ(log.unavailable, std::vector<std::int64_t>{1});
}

TEST(Client, LiveModeRequiresTransport) {
    ResponseCache cache;
    EXPECT_THROW(BatchClient("users", ClientMode::live, cache), ConfigError);
}

TEST(Cache, MissingRequiredFile) { EXPECT_THROW(ResponseCache("/nonexistent/cache.tsv", true), ConfigError); }
