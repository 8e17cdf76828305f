#pragma once

// Statistical kernel: Mann-Whitney U, 2x2 chi-squared, Spearman rank
// correlation, ordinary least squares and logistic regression by IRLS.
// Every routine is a pure function of its arguments.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabooscope::stats {

class StatsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TestResult {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<std::size_t> sizes;
    int direction = 0;  // +1: first group / positive association larger, -1 smaller, 0 none
    std::string notes;
};

struct RegressionFit {
    std::vector<std::string> names;
    std::vector<double> estimates;
    std::vector<double> std_errors;
    std::vector<double> statistics;  // t (OLS) or Wald z (logistic)
    std::vector<double> p_values;
    std::vector<double> ci_lower;
    std::vector<double> ci_upper;
    std::size_t n = 0;
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    double adj_r_squared = std::numeric_limits<double>::quiet_NaN();
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
    double aic = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;

    std::optional<std::size_t> index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        return std::nullopt;
    }
};

inline constexpr double kZ975 = 1.96;

// Two-sided standard normal tail probability P(|Z| >= z).
inline double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

// Upper tail of chi-squared with one degree of freedom.
inline double chi2_1df_sf(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(x / 2.0)); }

inline double students_t_two_sided(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

// 1-based ranks with ties sharing the average rank.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

enum class MwuMethod { automatic, exact, asymptotic };

struct MwuOptions {
    MwuMethod method = MwuMethod::automatic;
    double exact_max_product = 64;  // exact when n1 * n2 <= this
    bool continuity = true;
};

// Exact two-sided p-value by counting every assignment of the pooled
// (mid)ranks to the first sample. Doubled ranks are integers, so the
// rank-sum distribution is a subset-sum count over sizes.
inline double mwu_exact_p(const std::vector<double>& pooled_ranks, std::size_t n1, double u_obs) {
    const std::size_t N = pooled_ranks.size();
    const std::size_t n2 = N - n1;
    std::vector<int> r2(N);
    int total = 0;
    for (std::size_t i = 0; i < N; ++i) {
        r2[i] = static_cast<int>(std::lround(2.0 * pooled_ranks[i]));
        total += r2[i];
    }
    // counts[k][s]: number of k-subsets with doubled rank sum s
    std::vector<std::vector<double>> counts(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    counts[0][0] = 1.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = std::min(i + 1, n1); k >= 1; --k)
            for (int s = total; s >= r2[i]; --s)
                counts[k][static_cast<std::size_t>(s)] += counts[k - 1][static_cast<std::size_t>(s - r2[i])];

    const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    const double base = static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
    const double dev_obs = std::fabs(u_obs - mu);
    double hits = 0.0, all = 0.0;
    for (int s = 0; s <= total; ++s) {
        double c = counts[n1][static_cast<std::size_t>(s)];
        if (c == 0.0) continue;
        all += c;
        double u = s / 2.0 - base;
        if (std::fabs(u - mu) >= dev_obs - 1e-9) hits += c;
    }
    return std::min(1.0, hits / all);
}

// U is the statistic of the first sample: pairs (x in a, y in b) with x > y,
// ties counting one half. Two-sided p-value.
inline TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                 const MwuOptions& opt = {}) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: both samples must be nonempty");
    const std::size_t n1 = a.size(), n2 = b.size(), N = n1 + n2;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto ranks = average_ranks(pooled);
    double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
    const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dN = static_cast<double>(N);
    double u = r1 - dn1 * (dn1 + 1.0) / 2.0;
    double mu = dn1 * dn2 / 2.0;

    TestResult res;
    res.test_name = "Mann-Whitney U";
    res.statistic = u;
    res.sizes = {n1, n2};
    res.direction = u > mu ? 1 : (u < mu ? -1 : 0);

    if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
        res.p_value = 1.0;
        res.notes = "pooled data constant; p set to 1";
        return res;
    }

    bool exact = opt.method == MwuMethod::exact ||
                 (opt.method == MwuMethod::automatic && dn1 * dn2 <= opt.exact_max_product);
    if (exact) {
        res.p_value = mwu_exact_p(ranks, n1, u);
        res.notes = "exact";
        return res;
    }
    // Tie-corrected variance.
    std::map<double, std::size_t> ties;
    for (double r : ranks) ++ties[r];
    double tie_term = 0.0;
    for (const auto& [r, t] : ties) {
        auto dt = static_cast<double>(t);
        tie_term += dt * dt * dt - dt;
    }
    double var = dn1 * dn2 / 12.0 * ((dN + 1.0) - tie_term / (dN * (dN - 1.0)));
    double dev = std::fabs(u - mu);
    if (opt.continuity) dev = std::max(0.0, dev - 0.5);
    double z = dev / std::sqrt(var);
    res.p_value = std::min(1.0, normal_two_sided(z));
    res.notes = opt.continuity ? "normal approximation, continuity corrected" : "normal approximation";
    return res;
}

// ---------------------------------------------------------------------------
// Chi-squared

using Table2x2 = std::array<std::array<double, 2>, 2>;

// Pearson statistic on a 2x2 table, optionally Yates-corrected. One df.
inline TestResult chi_squared_2x2(const Table2x2& t, bool yates = true) {
    for (const auto& row : t)
        for (double c : row)
            if (c < 0.0 || !std::isfinite(c)) throw std::invalid_argument("chi_squared_2x2: counts must be >= 0");
    std::array<double, 2> rows{t[0][0] + t[0][1], t[1][0] + t[1][1]};
    std::array<double, 2> cols{t[0][0] + t[1][0], t[0][1] + t[1][1]};
    double total = rows[0] + rows[1];
    if (rows[0] == 0.0 || rows[1] == 0.0 || cols[0] == 0.0 || cols[1] == 0.0)
        throw std::invalid_argument("chi_squared_2x2: table has a zero marginal");
    double chi2 = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double e = rows[i] * cols[j] / total;
            double d = std::fabs(t[i][j] - e);
            if (yates) d = std::max(0.0, d - 0.5);
            chi2 += d * d / e;
        }
    TestResult res;
    res.test_name = yates ? "Chi-squared (Yates)" : "Chi-squared";
    res.statistic = chi2;
    res.p_value = chi2_1df_sf(chi2);
    res.sizes = {static_cast<std::size_t>(rows[0]), static_cast<std::size_t>(rows[1])};
    double cross = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    res.direction = cross > 0 ? 1 : (cross < 0 ? -1 : 0);
    return res;
}

// Rows: group true / false. Columns: outcome true / false.
inline Table2x2 cross_tabulate(const std::vector<bool>& group, const std::vector<bool>& outcome) {
    if (group.size() != outcome.size()) throw std::invalid_argument("cross_tabulate: length mismatch");
    Table2x2 t{};
    for (std::size_t i = 0; i < group.size(); ++i) t[group[i] ? 0 : 1][outcome[i] ? 0 : 1] += 1.0;
    return t;
}

// ---------------------------------------------------------------------------
// Spearman

inline TestResult spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman_rho: length mismatch");
    if (x.size() < 3) throw std::invalid_argument("spearman_rho: need at least 3 pairs");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw StatsError("spearman_rho: undefined for a constant vector");
    double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    double df = static_cast<double>(x.size()) - 2.0;
    TestResult res;
    res.test_name = "Spearman rho";
    res.statistic = rho;
    res.sizes = {x.size()};
    res.direction = rho > 0 ? 1 : (rho < 0 ? -1 : 0);
    if (std::fabs(rho) >= 1.0) {
        res.p_value = 0.0;
    } else {
        double t = rho * std::sqrt(df / (1.0 - rho * rho));
        res.p_value = students_t_two_sided(t, df);
    }
    res.notes = "t approximation";
    return res;
}

// ---------------------------------------------------------------------------
// Dense helpers

// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < m.rows; ++i) {
            if (rows[i].size() != m.cols) throw std::invalid_argument("Matrix::from_rows: ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
        }
        return m;
    }
};

namespace detail {

// In-place Cholesky A = L L^T (lower triangle). Returns false if A is not
// numerically positive definite.
inline bool cholesky(Matrix& a) {
    const std::size_t n = a.rows;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a(i, i)));
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 1e-13 * scale)) return false;
        a(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / a(j, j);
        }
    }
    return true;
}

inline std::vector<double> cholesky_solve(const Matrix& l, std::vector<double> b) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l(i, k) * b[k];
        b[i] /= l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= l(k, i) * b[k];
        b[i] /= l(i, i);
    }
    return b;
}

inline std::vector<double> cholesky_inverse_diagonal(const Matrix& l) {
    const std::size_t n = l.rows;
    std::vector<double> diag(n);
    std::vector<double> e(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        diag[j] = cholesky_solve(l, e)[j];
    }
    return diag;
}

inline void check_design(const Matrix& x, std::size_t y_size, const std::vector<std::string>& names) {
    if (x.rows != y_size) throw std::invalid_argument("design matrix rows do not match outcome length");
    if (!names.empty() && names.size() != x.cols)
        throw std::invalid_argument("coefficient names do not match design columns");
    if (x.rows <= x.cols) throw std::invalid_argument("need more observations than coefficients");
}

inline std::vector<std::string> default_names(std::size_t p, const std::vector<std::string>& names) {
    if (!names.empty()) return names;
    std::vector<std::string> out;
    for (std::size_t j = 0; j < p; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// OLS

// Least squares by Householder QR. The design must contain the intercept
// column explicitly. 95% intervals use the normal quantile 1.96.
inline RegressionFit ols_fit(const Matrix& x, const std::vector<double>& y, std::vector<std::string> names = {}) {
    detail::check_design(x, y.size(), names);
    names = detail::default_names(x.cols, names);
    const std::size_t n = x.rows, p = x.cols;

    Matrix qr = x;
    std::vector<double> qty = y;
    std::vector<double> col_norm(p);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x(i, j) * x(i, j);
        col_norm[j] = std::sqrt(s);
    }
    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += qr(i, k) * qr(i, k);
        norm = std::sqrt(norm);
        if (norm <= 1e-10 * std::max(col_norm[k], 1e-300)) {
            std::string msg = "ols_fit: design is rank-deficient; column '" + names[k] + "'";
            msg += k == 0 ? " is zero" : " is collinear with columns";
            for (std::size_t j = 0; j < k; ++j) msg += (j ? ", '" : " '") + names[j] + "'";
            throw StatsError(msg);
        }
        double alpha = qr(k, k) > 0 ? -norm : norm;
        std::vector<double> v(n - k);
        for (std::size_t i = k; i < n; ++i) v[i - k] = qr(i, k);
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (double c : v) vnorm2 += c * c;
        if (vnorm2 > 0.0) {
            for (std::size_t j = k; j < p; ++j) {
                double s = 0.0;
                for (std::size_t i = k; i < n; ++i) s += v[i - k] * qr(i, j);
                s = 2.0 * s / vnorm2;
                for (std::size_t i = k; i < n; ++i) qr(i, j) -= s * v[i - k];
            }
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += v[i - k] * qty[i];
            s = 2.0 * s / vnorm2;
            for (std::size_t i = k; i < n; ++i) qty[i] -= s * v[i - k];
        }
    }
    // Back-substitution R beta = (Q^T y)[0..p)
    std::vector<double> beta(p);
    for (std::size_t i = p; i-- > 0;) {
        double s = qty[i];
        for (std::size_t j = i + 1; j < p; ++j) s -= qr(i, j) * beta[j];
        beta[i] = s / qr(i, i);
    }
    // diag((R^T R)^-1) = row norms of R^-1
    Matrix rinv(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        rinv(j, j) = 1.0 / qr(j, j);
        for (std::size_t i = j; i-- > 0;) {
            double s = 0.0;
            for (std::size_t k = i + 1; k <= j; ++k) s += qr(i, k) * rinv(k, j);
            rinv(i, j) = -s / qr(i, i);
        }
    }

    double rss = 0.0, ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);
    double tss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < p; ++j) fit += x(i, j) * beta[j];
        rss += (y[i] - fit) * (y[i] - fit);
        tss += (y[i] - ybar) * (y[i] - ybar);
    }
    const double df = static_cast<double>(n - p);
    const double sigma2 = rss / df;

    RegressionFit fit;
    fit.names = names;
    fit.estimates = beta;
    fit.n = n;
    for (std::size_t j = 0; j < p; ++j) {
        double v = 0.0;
        for (std::size_t k = j; k < p; ++k) v += rinv(j, k) * rinv(j, k);
        double se = std::sqrt(sigma2 * v);
        double t = se > 0.0 ? beta[j] / se : std::numeric_limits<double>::infinity();
        fit.std_errors.push_back(se);
        fit.statistics.push_back(t);
        fit.p_values.push_back(se > 0.0 ? students_t_two_sided(t, df) : 0.0);
        fit.ci_lower.push_back(beta[j] - kZ975 * se);
        fit.ci_upper.push_back(beta[j] + kZ975 * se);
    }
    fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * (static_cast<double>(n) - 1.0) / df;
    const double dn = static_cast<double>(n);
    fit.log_likelihood = -dn / 2.0 * (std::log(2.0 * M_PI) + std::log(rss / dn) + 1.0);
    fit.aic = 2.0 * static_cast<double>(p + 1) - 2.0 * fit.log_likelihood;
    return fit;
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticOptions {
    double tolerance = 1e-8;  // on the largest coefficient change
    std::size_t max_iterations = 100;
};

inline double logistic(double eta) {
    return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// Maximum likelihood by iteratively reweighted least squares (Newton's
// method on the log-likelihood). Complete separation shows up as a singular
// weighted Gram matrix or a perfect fit and is reported as an error.
inline RegressionFit logistic_fit(const Matrix& x, const std::vector<double>& y, std::vector<std::string> names = {},
                                  const LogisticOptions& opt = {}) {
    detail::check_design(x, y.size(), names);
    names = detail::default_names(x.cols, names);
    for (double v : y)
        if (v != 0.0 && v != 1.0) throw std::invalid_argument("logistic_fit: outcome must be 0/1");
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
        throw std::invalid_argument("logistic_fit: outcome is constant");
    const std::size_t n = x.rows, p = x.cols;

    std::vector<double> beta(p, 0.0), prob(n);
    bool converged = false;
    std::size_t it = 0;
    auto separated = [&] {
        return std::all_of(prob.begin(), prob.end(), [&, i = std::size_t{0}](double pr) mutable {
            return std::fabs(pr - y[i++]) < 1e-8;
        });
    };
    while (it < opt.max_iterations) {
        ++it;
        Matrix h(p, p);
        std::vector<double> grad(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (std::size_t j = 0; j < p; ++j) eta += x(i, j) * beta[j];
            prob[i] = logistic(eta);
            double w = prob[i] * (1.0 - prob[i]);
            double r = y[i] - prob[i];
            for (std::size_t j = 0; j < p; ++j) {
                grad[j] += x(i, j) * r;
                for (std::size_t k = 0; k <= j; ++k) h(j, k) += w * x(i, j) * x(i, k);
            }
        }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = j + 1; k < p; ++k) h(j, k) = h(k, j);
        if (separated() || !detail::cholesky(h))
            throw StatsError("logistic_fit: complete separation or singular information matrix; "
                             "coefficients diverge");
        auto step = detail::cholesky_solve(h, grad);
        double max_step = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            beta[j] += step[j];
            max_step = std::max(max_step, std::fabs(step[j]));
        }
        if (max_step < opt.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw StatsError("logistic_fit: IRLS did not converge in " + std::to_string(opt.max_iterations) +
                         " iterations (possible separation)");

    // Information matrix at the final estimate.
    Matrix h(p, p);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < p; ++j) eta += x(i, j) * beta[j];
        double pr = logistic(eta);
        double w = pr * (1.0 - pr);
        ll += y[i] == 1.0 ? std::log(std::max(pr, 1e-300)) : std::log(std::max(1.0 - pr, 1e-300));
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k <= j; ++k) h(j, k) += w * x(i, j) * x(i, k);
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = j + 1; k < p; ++k) h(j, k) = h(k, j);
    if (!detail::cholesky(h)) throw StatsError("logistic_fit: singular information matrix at the estimate");
    auto var = detail::cholesky_inverse_diagonal(h);

    RegressionFit fit;
    fit.names = names;
    fit.estimates = beta;
    fit.n = n;
    fit.iterations = it;
    for (std::size_t j = 0; j < p; ++j) {
        double se = std::sqrt(var[j]);
        double z = beta[j] / se;
        fit.std_errors.push_back(se);
        fit.statistics.push_back(z);
        fit.p_values.push_back(normal_two_sided(z));
        fit.ci_lower.push_back(beta[j] - kZ975 * se);
        fit.ci_upper.push_back(beta[j] + kZ975 * se);
    }
    fit.log_likelihood = ll;
    fit.aic = 2.0 * static_cast<double>(p) - 2.0 * ll;
    return fit;
}

// Builds [1, columns...] design rows.
inline Matrix design_with_intercept(const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) throw std::invalid_argument("design_with_intercept: no columns");
    const std::size_t n = columns.front().size();
    Matrix x(n, columns.size() + 1);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (columns[j].size() != n) throw std::invalid_argument("design_with_intercept: ragged columns");
            x(i, j + 1) = columns[j][i];
        }
    }
    return x;
}

}  // namespace tabooscope::stats
