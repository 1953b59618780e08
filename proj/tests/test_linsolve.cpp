/// Linear solver tests against independent dense and substitution oracles.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "rothe/sparse.hpp"

using namespace rothe;

namespace {

/// Dense Gaussian elimination with partial pivoting; the oracle route.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

}  // namespace

TEST_CASE("solve_spd: identity and diagonal systems") {
    const int n = 10;
    std::vector<std::tuple<int, int, double>> trip;
    for (int k = 0; k < n; ++k) trip.emplace_back(k, k, 1.0);
    const auto I = SparseOperator::from_triplets(n, trip, true);
    std::vector<double> rhs(n);
    for (int k = 0; k < n; ++k) rhs[k] = 0.1 * k - 0.3;
    auto r = solve_spd(I, rhs);
    CHECK(r.stats.converged);
    for (int k = 0; k < n; ++k) CHECK(r.x[k] == doctest::Approx(rhs[k]).epsilon(1e-14));

    trip.clear();
    for (int k = 0; k < n; ++k) trip.emplace_back(k, k, 2.0 + k);
    const auto D = SparseOperator::from_triplets(n, trip, true);
    r = solve_spd(D, rhs);
    CHECK(r.stats.converged);
    for (int k = 0; k < n; ++k)
        CHECK(r.x[k] == doctest::Approx(rhs[k] / (2.0 + k)).epsilon(1e-12));
}

TEST_CASE("solve_spd: 1D Neumann Poisson with mean-zero gauge vs dense oracle") {
    const int n = 32;
    const double h = 1.0 / n;
    std::vector<std::tuple<int, int, double>> trip;
    for (int k = 0; k < n; ++k) {
        double diag = 0.0;
        if (k > 0) {
            diag += 1.0 / (h * h);
            trip.emplace_back(k, k - 1, -1.0 / (h * h));
        }
        if (k < n - 1) {
            diag += 1.0 / (h * h);
            trip.emplace_back(k, k + 1, -1.0 / (h * h));
        }
        trip.emplace_back(k, k, diag);
    }
    const auto L = SparseOperator::from_triplets(n, trip, true);

    // mean-zero right-hand side
    std::vector<double> f(n);
    double mean = 0.0;
    for (int k = 0; k < n; ++k) {
        f[k] = std::sin(2.0 * 3.14159265358979323846 * (k + 0.5) * h);
        mean += f[k];
    }
    for (auto& x : f) x -= mean / n;

    SolveOptions opt;
    opt.tol = 1e-12;
    auto r = solve_spd(L, f, opt);
    CHECK(r.stats.converged);
    // project the CG answer to mean zero (kernel gauge)
    double xm = 0.0;
    for (double x : r.x) xm += x;
    for (auto& x : r.x) x -= xm / n;

    // oracle: rank-one regularized dense system (adds the kernel direction)
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 1.0 / n));
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            A[k][k - 1] += -1.0 / (h * h);
            A[k][k] += 1.0 / (h * h);
        }
        if (k < n - 1) {
            A[k][k + 1] += -1.0 / (h * h);
            A[k][k] += 1.0 / (h * h);
        }
    }
    const auto x_dense = dense_solve(A, f);
    for (int k = 0; k < n; ++k) CHECK(r.x[k] == doctest::Approx(x_dense[k]).epsilon(1e-9));
}

TEST_CASE("solve_general: identity, bidiagonal forward-substitution oracle") {
    const int n = 12;
    std::vector<std::tuple<int, int, double>> trip;
    for (int k = 0; k < n; ++k) trip.emplace_back(k, k, 1.0);
    std::vector<double> rhs(n);
    for (int k = 0; k < n; ++k) rhs[k] = std::cos(0.7 * k);
    auto r = solve_general(SparseOperator::from_triplets(n, trip), rhs);
    CHECK(r.stats.converged);
    for (int k = 0; k < n; ++k) CHECK(r.x[k] == doctest::Approx(rhs[k]).epsilon(1e-13));

    // lower bidiagonal: 2 on the diagonal, -1 below
    trip.clear();
    for (int k = 0; k < n; ++k) {
        trip.emplace_back(k, k, 2.0);
        if (k > 0) trip.emplace_back(k, k - 1, -1.0);
    }
    const auto B = SparseOperator::from_triplets(n, trip);
    SolveOptions opt;
    opt.tol = 1e-13;
    r = solve_general(B, rhs, opt);
    CHECK(r.stats.converged);
    std::vector<double> fwd(n);
    for (int k = 0; k < n; ++k) fwd[k] = (rhs[k] + (k > 0 ? fwd[k - 1] : 0.0)) / 2.0;
    for (int k = 0; k < n; ++k) CHECK(std::abs(r.x[k] - fwd[k]) <= 1e-12);
}

TEST_CASE("solve_general: periodic upwind advection-reaction vs dense oracle") {
    const int n = 32;
    const double h = 1.0 / n;
    const double alpha = 100.0;
    const double c = 0.8;  // positive speed -> upwind from the left
    std::vector<std::tuple<int, int, double>> trip;
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (int k = 0; k < n; ++k) {
        trip.emplace_back(k, k, alpha + c / h);
        A[k][k] = alpha + c / h;
        const int prev = (k + n - 1) % n;
        trip.emplace_back(k, prev, -c / h);
        A[k][prev] = -c / h;
    }
    std::vector<double> s(n);
    for (int k = 0; k < n; ++k)
        s[k] = alpha * (1.0 + 0.5 * std::sin(2.0 * 3.14159265358979323846 * (k + 0.5) * h));
    SolveOptions opt;
    opt.tol = 1e-12;
    auto r = solve_general(SparseOperator::from_triplets(n, trip), s, opt);
    CHECK(r.stats.converged);
    const auto oracle = dense_solve(A, s);
    for (int k = 0; k < n; ++k) CHECK(r.x[k] == doctest::Approx(oracle[k]).epsilon(1e-9));
}

TEST_CASE("reported residual matches an independent recomputation") {
    const int n = 64;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::tuple<int, int, double>> trip;
    for (int k = 0; k < n; ++k) {
        trip.emplace_back(k, k, 4.0 + 0.1 * k);
        if (k > 0) trip.emplace_back(k, k - 1, -1.0 + 0.1 * dist(rng));
        if (k < n - 1) trip.emplace_back(k, k + 1, -1.0 + 0.1 * dist(rng));
    }
    const auto A = SparseOperator::from_triplets(n, trip);
    std::vector<double> b(n);
    for (auto& x : b) x = dist(rng);

    const auto r = solve_general(A, b);
    const auto ax = A.apply(r.x);
    double rr = 0.0, bb = 0.0;
    for (int k = 0; k < n; ++k) {
        rr += (b[k] - ax[k]) * (b[k] - ax[k]);
        bb += b[k] * b[k];
    }
    const double recomputed = std::sqrt(rr) / std::sqrt(bb);
    CHECK(std::abs(r.stats.residual - recomputed) <= 1e-13);
    CHECK(r.stats.converged);
    CHECK(r.stats.residual <= 1e-10);
}

TEST_CASE("determinism: identical inputs give bitwise-identical solutions") {
    const int n = 128;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::tuple<int, int, double>> trip;
    for (int k = 0; k < n; ++k) {
        trip.emplace_back(k, k, 5.0);
        if (k > 0) trip.emplace_back(k, k - 1, -1.0);
        if (k < n - 1) trip.emplace_back(k, k + 1, -2.0);
    }
    const auto A = SparseOperator::from_triplets(n, trip);
    std::vector<double> b(n);
    for (auto& x : b) x = dist(rng);

    const auto r1 = solve_general(A, b);
    const auto r2 = solve_general(A, b);
    CHECK(std::memcmp(r1.x.data(), r2.x.data(), n * sizeof(double)) == 0);

    std::vector<std::tuple<int, int, double>> strip;
    for (int k = 0; k < n; ++k) {
        strip.emplace_back(k, k, 5.0);
        if (k > 0) strip.emplace_back(k, k - 1, -1.0);
        if (k < n - 1) strip.emplace_back(k, k + 1, -1.0);
    }
    const auto S = SparseOperator::from_triplets(n, strip, true);
    const auto s1 = solve_spd(S, b);
    const auto s2 = solve_spd(S, b);
    CHECK(std::memcmp(s1.x.data(), s2.x.data(), n * sizeof(double)) == 0);
}
