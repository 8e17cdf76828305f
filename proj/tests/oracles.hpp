#pragma once

// Independent reference implementations used only by the tests. None of
// them shares code with the library: dense Eigen solves, brute-force
// enumeration, plain Newton iterations.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// (X^T X + lambda I)^{-1} X^T y by a dense LDLT solve.
inline std::vector<double> ridge(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                                 double lambda) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd X(n, m);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) X(i, j) = rows[i][j];
        Y(i) = y[i];
    }
    Eigen::MatrixXd A = X.transpose() * X + lambda * Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd w = A.ldlt().solve(X.transpose() * Y);
    return {w.data(), w.data() + w.size()};
}

// Dense least squares via complete orthogonal decomposition.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd X(n, m);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) X(i, j) = rows[i][j];
        Y(i) = y[i];
    }
    Eigen::VectorXd w = X.completeOrthogonalDecomposition().solve(Y);
    return {w.data(), w.data() + w.size()};
}

// Literal reading of the definition: r reverted iff exists j in (r, r+window]
// and k < r with checksum[j] == checksum[k].
inline std::vector<bool> reverts(const std::vector<std::string>& c, std::size_t window) {
    std::vector<bool> out(c.size(), false);
    for (std::size_t r = 0; r < c.size(); ++r)
        for (std::size_t j = r + 1; j <= r + window && j < c.size() && !out[r]; ++j)
            for (std::size_t k = 0; k < r; ++k)
                if (c[j] == c[k]) {
                    out[r] = true;
                    break;
                }
    return out;
}

// U of the first sample by pair counting (ties count 1/2).
inline double mwu_u(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

// Exact two-sided p by enumerating every split of the pooled data into
// groups of size |a| and |b|: P(|U - mu| >= |U_obs - mu|).
inline double mwu_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size(), n1 = a.size();
    const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
    const double dev = std::fabs(mwu_u(a, b) - mu);
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), true);
    std::sort(pick.begin(), pick.end());
    double hits = 0.0, total = 0.0;
    do {
        std::vector<double> g1, g2;
        for (std::size_t i = 0; i < n; ++i) (pick[i] ? g1 : g2).push_back(pooled[i]);
        total += 1.0;
        if (std::fabs(mwu_u(g1, g2) - mu) >= dev - 1e-9) hits += 1.0;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return std::min(1.0, hits / total);
}

// Plain Newton-Raphson on the logistic log-likelihood with Eigen, many
// iterations and no early exit tricks.
inline std::vector<double> logistic_newton(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rows[i][j];
        Y(i) = y[i];
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd eta = X * beta;
        Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
        Eigen::VectorXd w = mu.cwiseProduct(Eigen::VectorXd::Ones(n) - mu);
        Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
        Eigen::VectorXd g = X.transpose() * (Y - mu);
        beta += H.ldlt().solve(g);
    }
    return {beta.data(), beta.data() + beta.size()};
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("tabooscope-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

// Synthetic data shared by the unit tests and the acceptance binary.
namespace gen {

// Design rows [1, x1..xp] with standard normal covariates and y drawn from
// the logistic model with coefficients (0.3, 0.8, -0.5, ...).
inline void logistic_data(std::uint64_t seed, std::size_t n, std::size_t p, std::vector<std::vector<double>>& rows,
                          std::vector<double>& y) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    rows.assign(n, std::vector<double>(p + 1, 1.0));
    y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.3;
        for (std::size_t j = 1; j <= p; ++j) {
            rows[i][j] = z(rng);
            eta += (j % 2 ? 0.8 : -0.5) * rows[i][j];
        }
        y[i] = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
}

// Untied samples of sizes n1, n2 whose first-sample U equals u: ranks of the
// first sample are spread from the top so positions stay increasing.
inline void samples_with_u(std::size_t n1, std::size_t n2, std::size_t u, std::vector<double>& a,
                           std::vector<double>& b) {
    std::vector<std::size_t> shift(n1, 0);
    for (std::size_t i = n1; i-- > 0 && u > 0;) {
        shift[i] = std::min(u, n2);
        u -= shift[i];
    }
    std::vector<bool> in_a(n1 + n2, false);
    for (std::size_t i = 0; i < n1; ++i) in_a[i + shift[i]] = true;
    a.clear();
    b.clear();
    for (std::size_t k = 0; k < n1 + n2; ++k) (in_a[k] ? a : b).push_back(0.5 + static_cast<double>(k));
}

}  // namespace gen

}  // namespace oracle
