#include <gtest/gtest.h>

#include <cctype>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tabooscope/dictionary.hpp"

using namespace tabooscope;

namespace {

DictionarySense sense(std::string word, std::string gloss, std::string lang = "en", bool euph = false) {
    DictionarySense s;
    s.headword = std::move(word);
    s.definition = std::move(gloss);
    s.language = std::move(lang);
    s.euphemistic = euph;
    return s;
}

std::string random_text(std::mt19937& rng) {
    static const std::vector<std::string> pool{"The", "member", "of", "a", "group", "123", "term", "used",
                                               "body", "part", "x-ray", "42nd", "café", "  ", ",", "Death",
                                               "passing", "away", "euphemism", "for", "no", "TO"};
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(0, 12);
    std::string out;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) out += pool[pick(rng)] + (rng() % 3 ? " " : "");
    return out;
}

}  // namespace

TEST(ParseDictionary, EmptyStream) {
    std::istringstream in("");
    auto r = parse_dictionary_stream(in);
    EXPECT_TRUE(r.senses.empty());
    EXPECT_TRUE(r.errors.empty());
}

TEST(ParseDictionary, MalformedLineIsLoggedAndSkipped) {
    std::istringstream in(
        R"({"word":"cat","lang_code":"en","senses":[{"glosses":["a small feline"]}]})"
        "\n{not json\n"
        R"({"word":"dog","lang_code":"en","senses":[{"glosses":["a domestic canine"]}]})"
        "\n");
    auto r = parse_dictionary_stream(in);
    ASSERT_EQ(r.senses.size(), 2u);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].line, 2u);
    EXPECT_EQ(r.senses[0].headword, "cat");
    EXPECT_EQ(r.senses[1].headword, "dog");
}

TEST(ParseDictionary, EuphemisticTagOnMember) {
    std::istringstream in(
        R"({"word":"member","lang_code":"en","senses":[)"
        R"({"glosses":["One who officially belongs to a group."]},)"
        R"({"glosses":["The penis."],"tags":["euphemistic"]}]})");
    auto r = parse_dictionary_stream(in);
    ASSERT_EQ(r.senses.size(), 2u);
    EXPECT_FALSE(r.senses[0].euphemistic);
    EXPECT_TRUE(r.senses[1].euphemistic);
    EXPECT_EQ(r.senses[1].headword, "member");
}

TEST(ParseDictionary, ThreadCountDoesNotChangeResult) {
    std::ostringstream text;
    for (int i = 0; i < 5000; ++i) {
        if (i % 97 == 0) {
            text << "garbage " << i << "\n";
            continue;
        }
        text << R"({"word":"w)" << i << R"(","lang_code":"en","senses":[{"glosses":["gloss )" << i
             << R"("],"tags":[)" << (i % 7 == 0 ? R"("euphemistic")" : "") << "]}]}\n";
    }
    std::istringstream a(text.str()), b(text.str());
    auto one = parse_dictionary_stream(a, 1);
    auto many = parse_dictionary_stream(b, 8);
    EXPECT_EQ(one.senses, many.senses);
    ASSERT_EQ(one.errors.size(), many.errors.size());
    for (std::size_t i = 0; i < one.errors.size(); ++i) EXPECT_EQ(one.errors[i].line, many.errors[i].line);
}

TEST(ParseDictionary, BundledFixture) {
    auto in = open_input(support::fixture_dir() / "dictionary.jsonl");
    auto r = parse_dictionary_stream(in);
    EXPECT_GT(r.senses.size(), 400u);
    EXPECT_FALSE(r.errors.empty());
}

TEST(FilterSenses, RedirectGlossDropped) {
    auto kept = filter_senses({sense("cadaver", "synonym of corpse")});
    EXPECT_TRUE(kept.empty());
}

TEST(FilterSenses, PlantedRemovables) {
    std::vector<DictionarySense> in{
        sense("a", "first letter"),
        sense("b", "synonym of bee"),                // redirect
        sense("c", "a sea"),
        sense("d", "   "),                           // empty
        sense("e", "vowel"),
        sense("f", "fee", "fr"),                     // non-English
        sense("g", "gee"),
        sense("a", "first letter", "en", true),      // duplicate
        sense("h", "aitch"),
        sense("i", "eye"),
    };
    auto kept = filter_senses(in);
    ASSERT_EQ(kept.size(), 6u);
    EXPECT_EQ(kept[0].headword, "a");
    EXPECT_TRUE(kept[0].euphemistic);  // merged from the duplicate
}

TEST(FilterSenses, OutputIsOrderedSubsetOfInput) {
    std::mt19937 rng(3);
    std::vector<std::string> glosses{"synonym of x", "plain gloss", "alternative form of y", "", "other"};
    std::vector<DictionarySense> in;
    for (int i = 0; i < 300; ++i)
        in.push_back(sense("h" + std::to_string(rng() % 40), glosses[rng() % glosses.size()],
                           rng() % 5 ? "en" : "de", rng() % 4 == 0));
    auto kept = filter_senses(in);
    std::size_t pos = 0;
    for (const auto& k : kept) {
        while (pos < in.size() && !(in[pos].headword == k.headword && in[pos].definition == k.definition)) ++pos;
        ASSERT_LT(pos, in.size()) << "retained sense not found in order";
        ++pos;
    }
    EXPECT_EQ(filter_senses(in), kept);
}

TEST(NormalizeDefinition, Examples) {
    const auto& sw = support::stopwords();
    EXPECT_TRUE(normalize_definition("", sw).empty());
    EXPECT_EQ(normalize_definition("The member of a group 123", sw), (std::vector<std::string>{"member", "group"}));
    EXPECT_TRUE(normalize_definition("a term used especially for something", sw).empty());
}

TEST(NormalizeDefinition, Properties) {
    const auto& sw = support::stopwords();
    std::mt19937 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        auto text = random_text(rng);
        auto toks = normalize_definition(text, sw);
        EXPECT_EQ(normalize_definition(join_tokens(toks), sw), toks) << text;
        EXPECT_EQ(normalize_definition(text, sw), toks);
        for (const auto& t : toks) {
            EXPECT_FALSE(t.empty());
            EXPECT_FALSE(sw.contains(t));
            for (unsigned char c : t) {
                EXPECT_FALSE(std::isdigit(c)) << t;
                EXPECT_FALSE(std::isupper(c)) << t;
            }
        }
    }
}

TEST(NormalizeDefinition, KeepsUtf8Letters) {
    EXPECT_EQ(normalize_definition("café au lait", StopwordConfig{}),
              (std::vector<std::string>{"café", "au", "lait"}));
}

TEST(Documents, RoundTrip) {
    std::vector<NormalizedDocument> docs{{{"member", "group"}, false, "member"}, {{"penis"}, true, "member"},
                                         {{}, false, "x"}};
    std::stringstream io;
    write_documents(io, docs);
    EXPECT_EQ(read_documents(io), docs);
}
