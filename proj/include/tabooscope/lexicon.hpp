#pragma once

// Lexicon induction: n-gram vocabulary, TF-IDF sparse matrix, ridge fit by
// conjugate gradient on the normal equations, and coefficient ranking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "common.hpp"
#include "dictionary.hpp"

namespace tabooscope {

struct NgramRange {
    int min_n = 1;
    int max_n = 3;
};

inline NgramRange parse_ngram_range(std::string_view s) {
    auto f = split(s, ':');
    if (f.size() != 2) throw ParseError("n-gram range must look like 1:3, got '" + std::string(s) + "'");
    NgramRange r{parse_int<int>(f[0]), parse_int<int>(f[1])};
    if (r.min_n < 1 || r.max_n < r.min_n) throw ParseError("invalid n-gram range '" + std::string(s) + "'");
    return r;
}

// All contiguous n-grams (space-joined), with repetition, in position order.
inline std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens,
                                               NgramRange range) {
    std::vector<std::string> grams;
    for (int n = range.min_n; n <= range.max_n; ++n) {
        if (static_cast<std::size_t>(n) > tokens.size()) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string g = tokens[i];
            for (int k = 1; k < n; ++k) {
                g.push_back(' ');
                g += tokens[i + k];
            }
            grams.push_back(std::move(g));
        }
    }
    return grams;
}

class FeatureVocabulary {
  public:
    FeatureVocabulary() = default;

    // `features` must be sorted and unique; `doc_freq` parallel to it.
    FeatureVocabulary(std::vector<std::string> features, std::vector<std::size_t> doc_freq,
                      std::size_t n_docs, NgramRange range)
        : features_(std::move(features)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs),
          range_(range) {
        index_.reserve(features_.size());
        for (std::size_t i = 0; i < features_.size(); ++i) index_.emplace(features_[i], i);
    }

    std::size_t size() const { return features_.size(); }
    bool empty() const { return features_.empty(); }
    const std::string& feature(std::size_t i) const { return features_.at(i); }
    const std::vector<std::string>& features() const { return features_; }
    std::size_t doc_freq(std::size_t i) const { return doc_freq_.at(i); }
    std::size_t n_docs() const { return n_docs_; }
    NgramRange range() const { return range_; }

    std::optional<std::size_t> index_of(const std::string& feature) const {
        auto it = index_.find(feature);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
    double idf(std::size_t i) const {
        return std::log((1.0 + static_cast<double>(n_docs_)) /
                        (1.0 + static_cast<double>(doc_freq_.at(i)))) +
               1.0;
    }

  private:
    std::vector<std::string> features_;
    std::vector<std::size_t> doc_freq_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t n_docs_ = 0;
    NgramRange range_{};
};

// Columns are assigned in lexicographic order of the n-gram string.
inline FeatureVocabulary build_vocabulary(const std::vector<NormalizedDocument>& docs,
                                          NgramRange range = {}, std::size_t min_df = 2) {
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& d : docs) {
        auto grams = extract_ngrams(d.tokens, range);
        std::sort(grams.begin(), grams.end());
        grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
        for (auto& g : grams) ++df[std::move(g)];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [g, n] : df)
        if (n >= min_df) kept.emplace_back(g, n);
    std::sort(kept.begin(), kept.end());
    std::vector<std::string> features;
    std::vector<std::size_t> freqs;
    features.reserve(kept.size());
    freqs.reserve(kept.size());
    for (auto& [g, n] : kept) {
        features.push_back(std::move(g));
        freqs.push_back(n);
    }
    return FeatureVocabulary(std::move(features), std::move(freqs), docs.size(), range);
}

// Compressed sparse row matrix of non-negative weights.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }

    // y = A x
    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(n_rows, 0.0);
        for (std::size_t r = 0; r < n_rows; ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
            y[r] = s;
        }
        return y;
    }

    // x = A^T y
    std::vector<double> multiply_transpose(const std::vector<double>& y) const {
        std::vector<double> x(n_cols, 0.0);
        for (std::size_t r = 0; r < n_rows; ++r) {
            if (y[r] == 0.0) continue;
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) x[col_idx[k]] += values[k] * y[r];
        }
        return x;
    }

    std::map<std::size_t, double> row(std::size_t r) const {
        std::map<std::size_t, double> out;
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out[col_idx[k]] = values[k];
        return out;
    }

    static SparseMatrix from_dense(const std::vector<std::vector<double>>& rows) {
        SparseMatrix m;
        m.n_rows = rows.size();
        m.n_cols = rows.empty() ? 0 : rows.front().size();
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                if (row[c] != 0.0) {
                    m.col_idx.push_back(c);
                    m.values.push_back(row[c]);
                }
            m.row_ptr.push_back(m.values.size());
        }
        return m;
    }
};

namespace detail {

inline void tfidf_row(const NormalizedDocument& doc, const FeatureVocabulary& vocab,
                      std::vector<std::pair<std::size_t, double>>& out) {
    out.clear();
    std::map<std::size_t, double> counts;
    for (const auto& g : extract_ngrams(doc.tokens, vocab.range()))
        if (auto idx = vocab.index_of(g)) counts[*idx] += 1.0;
    double norm2 = 0.0;
    for (auto& [col, tf] : counts) {
        tf *= vocab.idf(col);
        norm2 += tf * tf;
    }
    if (norm2 == 0.0) return;
    double norm = std::sqrt(norm2);
    for (const auto& [col, w] : counts) out.emplace_back(col, w / norm);
}

}  // namespace detail

// Raw-count TF times smoothed IDF, rows L2-normalized. Rows are built in
// document shards and concatenated in document order.
inline SparseMatrix vectorize_tfidf(const std::vector<NormalizedDocument>& docs,
                                    const FeatureVocabulary& vocab, unsigned threads = 1) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(docs.size() / 512 + 1)));
    std::vector<SparseMatrix> shards(threads);
    auto work = [&](unsigned s) {
        std::size_t begin = docs.size() * s / threads;
        std::size_t end = docs.size() * (s + 1) / threads;
        auto& m = shards[s];
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t i = begin; i < end; ++i) {
            detail::tfidf_row(docs[i], vocab, row);
            for (const auto& [c, w] : row) {
                m.col_idx.push_back(c);
                m.values.push_back(w);
            }
            m.row_ptr.push_back(m.values.size());
            ++m.n_rows;
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
        for (auto& t : pool) t.join();
    }
    SparseMatrix out;
    out.n_cols = vocab.size();
    for (const auto& s : shards) {
        std::size_t offset = out.values.size();
        for (std::size_t r = 1; r < s.row_ptr.size(); ++r) out.row_ptr.push_back(s.row_ptr[r] + offset);
        out.col_idx.insert(out.col_idx.end(), s.col_idx.begin(), s.col_idx.end());
        out.values.insert(out.values.end(), s.values.begin(), s.values.end());
        out.n_rows += s.n_rows;
    }
    return out;
}

class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RidgeOptions {
    double tolerance = 1e-10;        // on ||b - A w|| relative to max(1, ||b||)
    std::size_t max_iterations = 0;  // 0 means 10 * n_features
};

struct RidgeSolution {
    std::vector<double> weights;
    std::size_t iterations = 0;
    double residual_norm = 0.0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// (X^T X + lambda I) v
inline std::vector<double> normal_product(const SparseMatrix& X, double lambda,
                                          const std::vector<double>& v) {
    auto out = X.multiply_transpose(X.multiply(v));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * v[i];
    return out;
}

// Conjugate gradient on (X^T X + lambda I) w = b, starting from zero.
// Returns nullopt if the iteration breaks down or exhausts its budget.
inline std::optional<RidgeSolution> cg_normal(const SparseMatrix& X, double lambda,
                                              const std::vector<double>& b,
                                              const RidgeOptions& opt) {
    const std::size_t m = X.n_cols;
    const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : std::max<std::size_t>(10 * m, 1);
    const double tol = opt.tolerance * std::max(1.0, std::sqrt(dot(b, b)));

    RidgeSolution sol;
    sol.weights.assign(m, 0.0);
    std::vector<double> r = b;
    std::vector<double> p = r;
    double rr = dot(r, r);
    if (std::sqrt(rr) <= tol) {
        sol.residual_norm = std::sqrt(rr);
        return sol;
    }
    for (std::size_t k = 1; k <= max_iter; ++k) {
        auto Ap = normal_product(X, lambda, p);
        double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) return std::nullopt;
        double alpha = rr / pAp;
        for (std::size_t i = 0; i < m; ++i) {
            sol.weights[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rr_next = dot(r, r);
        bool refresh = (k % 50 == 0) || std::sqrt(rr_next) <= tol;
        if (refresh) {
            // The recurrence drifts from the true residual; resync.
            auto Aw = normal_product(X, lambda, sol.weights);
            for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - Aw[i];
            rr_next = dot(r, r);
            if (std::sqrt(rr_next) <= tol) {
                sol.iterations = k;
                sol.residual_norm = std::sqrt(rr_next);
                return sol;
            }
            p = r;
            rr = rr_next;
            continue;
        }
        double beta = rr_next / rr;
        for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_next;
    }
    return std::nullopt;
}

}  // namespace detail

// argmin ||X w - y||^2 + lambda ||w||^2 (no intercept term).
// With lambda == 0 the system is checked for rank deficiency by solving a
// second system with a known solution; a mismatch means X^T X is singular
// (or numerically so) and the fit is reported as non-convergent.
inline RidgeSolution fit_ridge(const SparseMatrix& X, const std::vector<double>& y, double lambda,
                               const RidgeOptions& opt = {}) {
    if (X.n_rows != y.size())
        throw std::invalid_argument("fit_ridge: X has " + std::to_string(X.n_rows) + " rows but y has " +
                                    std::to_string(y.size()) + " entries");
    if (!(lambda >= 0.0)) throw std::invalid_argument("fit_ridge: lambda must be >= 0");

    if (lambda == 0.0 && X.n_cols > 0) {
        std::vector<bool> used(X.n_cols, false);
        for (auto c : X.col_idx) used[c] = true;
        if (X.n_rows < X.n_cols || std::find(used.begin(), used.end(), false) != used.end())
            throw SolverError("ridge did not converge: lambda = 0 and X is rank-deficient");
        std::mt19937_64 rng(0x5eed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::vector<double> z(X.n_cols);
        for (auto& v : z) v = unif(rng);
        auto probe = detail::cg_normal(X, 0.0, detail::normal_product(X, 0.0, z), opt);
        double err = 0.0, zn = 0.0;
        if (probe) {
            for (std::size_t i = 0; i < z.size(); ++i) {
                err += (probe->weights[i] - z[i]) * (probe->weights[i] - z[i]);
                zn += z[i] * z[i];
            }
        }
        if (!probe || std::sqrt(err) > 1e-6 * std::sqrt(zn))
            throw SolverError("ridge did not converge: lambda = 0 and X^T X is singular");
    }

    auto solution = detail::cg_normal(X, lambda, X.multiply_transpose(y), opt);
    if (!solution) throw SolverError("ridge conjugate gradient did not converge");
    return *solution;
}

struct LexiconEntry {
    std::string ngram;
    double coefficient = 0.0;
    int rank = 0;

    friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

struct TabooLexicon {
    std::vector<LexiconEntry> entries;
    int k = 500;

    std::size_t size() const { return entries.size(); }
};

// Top-K features by descending coefficient, ties broken by n-gram. Features
// with negative coefficients are never included.
inline TabooLexicon rank_terms(const std::vector<double>& weights, const FeatureVocabulary& vocab,
                               int k = 500) {
    if (k <= 0) throw std::invalid_argument("rank_terms: K must be positive");
    if (weights.size() != vocab.size())
        throw std::invalid_argument("rank_terms: weight vector does not match vocabulary");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] >= 0.0) order.push_back(i);
    auto better = [&](std::size_t a, std::size_t b) {
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        return vocab.feature(a) < vocab.feature(b);
    };
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
    TabooLexicon lex;
    lex.k = k;
    for (std::size_t i = 0; i < take; ++i)
        lex.entries.push_back({vocab.feature(order[i]), weights[order[i]], static_cast<int>(i + 1)});
    return lex;
}

struct InductionConfig {
    NgramRange ngrams{};
    std::size_t min_df = 2;
    double lambda = 1.0;
    int top_k = 500;
    unsigned threads = 1;
};

inline TabooLexicon induce_lexicon(const std::vector<NormalizedDocument>& docs,
                                   const InductionConfig& cfg = {}) {
    auto vocab = build_vocabulary(docs, cfg.ngrams, cfg.min_df);
    auto X = vectorize_tfidf(docs, vocab, cfg.threads);
    std::vector<double> y(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) y[i] = docs[i].label ? 1.0 : 0.0;
    auto fit = fit_ridge(X, y, cfg.lambda);
    return rank_terms(fit.weights, vocab, cfg.top_k);
}

inline void write_lexicon(std::ostream& out, const TabooLexicon& lex) {
    out << "rank\tngram\tcoefficient\n";
    for (const auto& e : lex.entries)
        out << e.rank << '\t' << e.ngram << '\t' << format_double(e.coefficient) << '\n';
}

inline TabooLexicon read_lexicon(std::istream& in) {
    TabooLexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("rank\t", 0) == 0) continue;
        if (line.empty()) continue;
        auto f = split(line, '\t');
        if (f.size() != 3) throw ParseError("lexicon line " + std::to_string(line_no) + " is malformed");
        lex.entries.push_back({std::string(f[1]), parse_double(f[2]), parse_int<int>(f[0])});
    }
    lex.k = static_cast<int>(lex.entries.size());
    return lex;
}

}  // namespace tabooscope
