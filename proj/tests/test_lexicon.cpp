#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tabooscope/lexicon.hpp"

using namespace tabooscope;

namespace {

NormalizedDocument doc(const std::string& text, bool label = false) {
    NormalizedDocument d;
    d.label = label;
    std::istringstream in(text);
    for (std::string t; in >> t;) d.tokens.push_back(t);
    return d;
}

std::set<std::string> feature_set(const FeatureVocabulary& v) { return {v.features().begin(), v.features().end()}; }

std::vector<std::vector<double>> random_dense(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    for (auto& r : rows)
        for (auto& v : r) v = u(rng);
    return rows;
}

// Sparse "definitions" corpus with a planted token in the positive class.
std::vector<NormalizedDocument> planted_corpus(std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::vector<std::string> words;
    for (int i = 0; i < 60; ++i) words.push_back("w" + std::to_string(i));
    std::vector<NormalizedDocument> docs;
    for (int i = 0; i < 200; ++i) {
        NormalizedDocument d;
        d.label = i % 20 == 0;
        for (int k = 0, n = 3 + static_cast<int>(rng() % 5); k < n; ++k) d.tokens.push_back(words[rng() % words.size()]);
        if (d.label) d.tokens.insert(d.tokens.begin() + static_cast<std::ptrdiff_t>(rng() % d.tokens.size()), "zorble");
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace

TEST(Ngrams, ParseRange) {
    auto r = parse_ngram_range("1:3");
    EXPECT_EQ(r.min_n, 1);
    EXPECT_EQ(r.max_n, 3);
    EXPECT_THROW(parse_ngram_range("3:1"), ParseError);
    EXPECT_THROW(parse_ngram_range("0:2"), ParseError);
    EXPECT_THROW(parse_ngram_range("2"), ParseError);
}

TEST(Vocabulary, EmptyCorpus) { EXPECT_TRUE(build_vocabulary({}).empty()); }

TEST(Vocabulary, HandEnumerated) {
    auto v = build_vocabulary({doc("a b"), doc("b c")}, {1, 2}, 1);
    EXPECT_EQ(feature_set(v), (std::set<std::string>{"a", "b", "c", "a b", "b c"}));
    auto w = build_vocabulary({doc("x y"), doc("x z")}, {1, 3}, 2);
    EXPECT_EQ(feature_set(w), (std::set<std::string>{"x"}));
}

TEST(Vocabulary, ColumnsAreLexicographic) {
    auto v = build_vocabulary({doc("z a b"), doc("b a z")}, {1, 3}, 1);
    EXPECT_TRUE(std::is_sorted(v.features().begin(), v.features().end()));
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.index_of(v.feature(i)), i);
}

TEST(Tfidf, SingleCell) {
    std::vector<NormalizedDocument> docs{doc("a")};
    auto v = build_vocabulary(docs, {1, 1}, 1);
    auto X = vectorize_tfidf(docs, v);
    ASSERT_EQ(X.nnz(), 1u);
    EXPECT_DOUBLE_EQ(X.values[0], 1.0);
}

TEST(Tfidf, TwoDocumentExample) {
    std::vector<NormalizedDocument> docs{doc("a b"), doc("a")};
    auto v = build_vocabulary(docs, {1, 1}, 1);
    auto X = vectorize_tfidf(docs, v);
    auto row = X.row(0);
    EXPECT_NEAR(row.at(*v.index_of("a")), 0.580, 1e-3);
    EXPECT_NEAR(row.at(*v.index_of("b")), 0.815, 1e-3);
    // Absent feature: no stored entry.
    EXPECT_EQ(X.row(1).count(*v.index_of("b")), 0u);
}

TEST(Tfidf, RowsUnitNormAndThreadInvariant) {
    auto docs = planted_corpus(5);
    docs.push_back(doc(""));
    auto v = build_vocabulary(docs, {1, 3}, 2);
    auto X = vectorize_tfidf(docs, v, 1);
    auto Y = vectorize_tfidf(docs, v, 4);
    EXPECT_EQ(X.values, Y.values);
    EXPECT_EQ(X.col_idx, Y.col_idx);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        double s = 0.0;
        for (auto [c, w] : X.row(r)) {
            EXPECT_GT(w, 0.0);
            s += w * w;
        }
        if (!X.row(r).empty()) EXPECT_NEAR(s, 1.0, 1e-12);
    }
    EXPECT_TRUE(X.row(X.n_rows - 1).empty());
}

TEST(Ridge, IdentitySystem) {
    auto X = SparseMatrix::from_dense({{1, 0}, {0, 1}});
    auto w = fit_ridge(X, {1, 0}, 0.0).weights;
    EXPECT_NEAR(w[0], 1.0, 1e-12);
    EXPECT_NEAR(w[1], 0.0, 1e-12);
}

TEST(Ridge, ClosedFormSingleColumn) {
    auto X = SparseMatrix::from_dense({{1}, {1}});
    EXPECT_NEAR(fit_ridge(X, {1, 0}, 1.0).weights[0], 1.0 / 3.0, 1e-12);
}

TEST(Ridge, MatchesDenseOracle) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> bit(0, 1);
    for (double lambda : {0.0, 0.1, 1.0, 10.0}) {
        auto rows = random_dense(rng, 20, 5);
        std::vector<double> y(20);
        for (auto& v : y) v = bit(rng);
        auto w = fit_ridge(SparseMatrix::from_dense(rows), y, lambda).weights;
        auto ref = oracle::ridge(rows, y, lambda);
        for (std::size_t j = 0; j < w.size(); ++j) EXPECT_NEAR(w[j], ref[j], 1e-8) << "lambda " << lambda;
    }
}

TEST(Ridge, GradientVanishesAtSolution) {
    std::mt19937_64 rng(23);
    auto rows = random_dense(rng, 25, 8);
    std::vector<double> y(25);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 3 == 0;
    auto X = SparseMatrix::from_dense(rows);
    const double lambda = 0.7;
    auto w = fit_ridge(X, y, lambda).weights;
    auto r = X.multiply(w);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    auto g = X.multiply_transpose(r);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(g[j] + lambda * w[j], 0.0, 1e-9);
}

TEST(Ridge, NormShrinksWithLambda) {
    std::mt19937_64 rng(29);
    auto rows = random_dense(rng, 15, 6);
    std::vector<double> y(15);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2;
    auto X = SparseMatrix::from_dense(rows);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        auto w = fit_ridge(X, y, lambda).weights;
        double n = std::sqrt(detail::dot(w, w));
        EXPECT_LE(n, prev + 1e-12);
        prev = n;
    }
}

TEST(Ridge, RankDeficientWithoutPenaltyFails) {
    EXPECT_THROW(fit_ridge(SparseMatrix::from_dense({{1, 1}, {2, 2}, {3, 3}}), {1, 0, 1}, 0.0), SolverError);
    EXPECT_THROW(fit_ridge(SparseMatrix::from_dense({{1, 0}, {2, 0}}), {1, 0}, 0.0), SolverError);
    EXPECT_THROW(fit_ridge(SparseMatrix::from_dense({{1, 2, 3}}), {1}, 0.0), SolverError);
    // A penalty makes the same system well posed.
    EXPECT_NO_THROW(fit_ridge(SparseMatrix::from_dense({{1, 1}, {2, 2}, {3, 3}}), {1, 0, 1}, 0.5));
}

TEST(Ridge, ArgumentChecks) {
    auto X = SparseMatrix::from_dense({{1}, {1}});
    EXPECT_THROW(fit_ridge(X, {1}, 1.0), std::invalid_argument);
    EXPECT_THROW(fit_ridge(X, {1, 0}, -1.0), std::invalid_argument);
}

TEST(RankTerms, Examples) {
    FeatureVocabulary v({"a", "b", "c"}, {1, 1, 1}, 3, {1, 1});
    auto lex = rank_terms({0.9, 0.1, -0.5}, v, 2);
    ASSERT_EQ(lex.size(), 2u);
    EXPECT_EQ(lex.entries[0].ngram, "a");
    EXPECT_EQ(lex.entries[1].ngram, "b");
    EXPECT_EQ(lex.entries[0].rank, 1);

    auto zeros = rank_terms({0, 0, 0}, v, 2);
    EXPECT_EQ(zeros.entries[0].ngram, "a");
    EXPECT_EQ(zeros.entries[1].ngram, "b");

    EXPECT_THROW(rank_terms({0, 0, 0}, v, 0), std::invalid_argument);
    EXPECT_THROW(rank_terms({0, 0, 0}, v, -3), std::invalid_argument);
}

TEST(RankTerms, OrderedAndBounded) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    std::vector<std::string> names;
    for (int i = 0; i < 80; ++i) names.push_back("f" + std::to_string(1000 + i));
    FeatureVocabulary v(names, std::vector<std::size_t>(names.size(), 1), 10, {1, 1});
    std::vector<double> w(names.size());
    for (auto& x : w) x = std::round(g(rng) * 4) / 4;  // plenty of ties
    auto lex = rank_terms(w, v, 30);
    EXPECT_LE(lex.size(), 30u);
    for (std::size_t i = 1; i < lex.size(); ++i) {
        const auto& a = lex.entries[i - 1];
        const auto& b = lex.entries[i];
        EXPECT_TRUE(a.coefficient > b.coefficient || (a.coefficient == b.coefficient && a.ngram < b.ngram));
        EXPECT_EQ(b.rank, static_cast<int>(i + 1));
    }
}

TEST(Induction, PlantedEuphemismRanksFirst) {
    auto docs = planted_corpus(1);
    InductionConfig cfg;
    cfg.top_k = 10;
    auto lex = induce_lexicon(docs, cfg);
    ASSERT_FALSE(lex.entries.empty());
    EXPECT_EQ(lex.entries[0].ngram, "zorble");
    std::ostringstream a, b;
    write_lexicon(a, lex);
    write_lexicon(b, induce_lexicon(docs, cfg));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Induction, LexiconRoundTrip) {
    auto lex = induce_lexicon(planted_corpus(2), {});
    std::stringstream io;
    write_lexicon(io, lex);
    auto back = read_lexicon(io);
    ASSERT_EQ(back.size(), lex.size());
    for (std::size_t i = 0; i < lex.size(); ++i) {
        EXPECT_EQ(back.entries[i].ngram, lex.entries[i].ngram);
        EXPECT_EQ(back.entries[i].rank, lex.entries[i].rank);
        EXPECT_NEAR(back.entries[i].coefficient, lex.entries[i].coefficient, 1e-12);
    }
}
