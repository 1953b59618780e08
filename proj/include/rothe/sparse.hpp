#pragma once

/// @file sparse.hpp
/// @brief Compressed-row sparse operators and the two iterative solvers used
///        by the sub-solvers: plain conjugate gradients for SPD systems and
///        Jacobi-preconditioned BiCGSTAB for the nonsymmetric ones.
///
/// Both solvers use fixed sequential reduction order, so identical inputs
/// produce bitwise-identical output. Reported residuals are recomputed from
/// op*x - rhs before returning, never taken from the recursion.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace rothe {

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  ///< relative, recomputed from the returned x
    bool converged = false;
};

struct SolveOptions {
    double tol = 1e-10;             ///< relative residual target
    int max_iter = 0;               ///< 0 means 10 * dimension
    const std::vector<double>* x0 = nullptr;  ///< optional warm start
};

class SparseOperator {
  public:
    SparseOperator() = default;

    /// Build from (row, col, value) triplets; duplicates are summed.
    static SparseOperator from_triplets(int n,
                                        const std::vector<std::tuple<int, int, double>>& trip,
                                        bool symmetric_hint = false) {
        std::map<std::pair<int, int>, double> acc;
        for (const auto& [r, c, v] : trip) {
            if (r < 0 || r >= n || c < 0 || c >= n)
                throw std::invalid_argument("SparseOperator: index out of range");
            acc[{r, c}] += v;
        }
        SparseOperator op;
        op.n_ = n;
        op.symmetric_ = symmetric_hint;
        op.row_ptr_.assign(n + 1, 0);
        for (const auto& [rc, v] : acc) op.row_ptr_[rc.first + 1]++;
        for (int r = 0; r < n; ++r) op.row_ptr_[r + 1] += op.row_ptr_[r];
        op.col_.resize(acc.size());
        op.val_.resize(acc.size());
        size_t k = 0;
        for (const auto& [rc, v] : acc) {
            op.col_[k] = rc.second;
            op.val_[k] = v;
            ++k;
        }
        return op;
    }

    int dim() const { return n_; }
    bool symmetric() const { return symmetric_; }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n_, 0.0);
        for (int r = 0; r < n_; ++r) {
            double s = 0.0;
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] = s;
        }
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y;
        apply(x, y);
        return y;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n_, 0.0);
        for (int r = 0; r < n_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                if (col_[k] == r) d[r] = val_[k];
        return d;
    }

    /// max |A - A^T| entry, for assembly tests
    double asymmetry() const {
        std::map<std::pair<int, int>, double> m;
        for (int r = 0; r < n_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m[{r, col_[k]}] = val_[k];
        double worst = 0.0;
        for (const auto& [rc, v] : m) {
            auto it = m.find({rc.second, rc.first});
            const double vt = (it == m.end()) ? 0.0 : it->second;
            worst = std::max(worst, std::abs(v - vt));
        }
        return worst;
    }

  private:
    int n_ = 0;
    bool symmetric_ = false;
    std::vector<int> row_ptr_;
    std::vector<int> col_;
    std::vector<double> val_;
};

struct SolveResult {
    std::vector<double> x;
    SolveStats stats;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double true_relative_residual(const SparseOperator& op, const std::vector<double>& x,
                                     const std::vector<double>& b, double bnorm) {
    std::vector<double> ax = op.apply(x);
    double s = 0.0;
    for (size_t k = 0; k < ax.size(); ++k) {
        const double r = b[k] - ax[k];
        s += r * r;
    }
    return std::sqrt(s) / bnorm;
}

}  // namespace detail

/// Conjugate gradients. Requires op symmetric positive definite (or positive
/// semidefinite with rhs and x0 orthogonal to the kernel, as in mean-zero
/// Poisson gauges).
inline SolveResult solve_spd(const SparseOperator& op, const std::vector<double>& rhs,
                             const SolveOptions& opt = {}) {
    const int n = op.dim();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("solve_spd: rhs size mismatch");
    const int max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * n;

    SolveResult res;
    res.x = opt.x0 ? *opt.x0 : std::vector<double>(n, 0.0);

    const double bnorm = detail::nrm2(rhs);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.stats.converged = true;
        return res;
    }

    std::vector<double> r = op.apply(res.x);
    for (int k = 0; k < n; ++k) r[k] = rhs[k] - r[k];
    std::vector<double> p = r;
    std::vector<double> ap(n);
    double rr = detail::dot(r, r);
    int it = 0;
    while (it < max_iter) {
        if (std::sqrt(rr) / bnorm <= opt.tol) {
            // recursion says done; accept only if the true residual agrees
            const double tr = detail::true_relative_residual(op, res.x, rhs, bnorm);
            if (tr <= opt.tol) break;
            // refresh from the true residual and keep going
            r = op.apply(res.x);
            for (int k = 0; k < n; ++k) r[k] = rhs[k] - r[k];
            p = r;
            rr = detail::dot(r, r);
        }
        op.apply(p, ap);
        const double pap = detail::dot(p, ap);
        if (pap <= 0.0) break;  // not SPD or breakdown
        const double a = rr / pap;
        for (int k = 0; k < n; ++k) res.x[k] += a * p[k];
        for (int k = 0; k < n; ++k) r[k] -= a * ap[k];
        const double rr_new = detail::dot(r, r);
        const double beta = rr_new / rr;
        for (int k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
        rr = rr_new;
        ++it;
    }
    res.stats.iterations = it;
    res.stats.residual = detail::true_relative_residual(op, res.x, rhs, bnorm);
    res.stats.converged = res.stats.residual <= opt.tol;
    return res;
}

/// BiCGSTAB with Jacobi preconditioning for the upwinded (nonsymmetric)
/// systems. Breakdown restarts once from the current iterate before failing.
inline SolveResult solve_general(const SparseOperator& op, const std::vector<double>& rhs,
                                 const SolveOptions& opt = {}) {
    const int n = op.dim();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("solve_general: rhs size mismatch");
    const int max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * n;

    SolveResult res;
    res.x = opt.x0 ? *opt.x0 : std::vector<double>(n, 0.0);

    const double bnorm = detail::nrm2(rhs);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.stats.converged = true;
        return res;
    }

    std::vector<double> dinv = op.diagonal();
    for (double& d : dinv) d = (d != 0.0) ? 1.0 / d : 1.0;

    std::vector<double> r(n), r0(n), p(n, 0.0), vv(n, 0.0), ph(n), sh(n), t(n), s(n);
    auto restart = [&]() {
        r = op.apply(res.x);
        for (int k = 0; k < n; ++k) r[k] = rhs[k] - r[k];
        r0 = r;
        p.assign(n, 0.0);
        vv.assign(n, 0.0);
    };
    restart();

    double rho = 1.0, alpha = 1.0, omega = 1.0;
    int it = 0;
    bool restarted = false;
    while (it < max_iter && detail::nrm2(r) / bnorm > opt.tol) {
        const double rho_new = detail::dot(r0, r);
        if (rho_new == 0.0 || omega == 0.0) {
            if (restarted) break;
            restarted = true;
            restart();
            rho = alpha = omega = 1.0;
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (int k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * vv[k]);
        for (int k = 0; k < n; ++k) ph[k] = dinv[k] * p[k];
        op.apply(ph, vv);
        const double r0v = detail::dot(r0, vv);
        if (r0v == 0.0) {
            if (restarted) break;
            restarted = true;
            restart();
            rho = alpha = omega = 1.0;
            continue;
        }
        alpha = rho / r0v;
        for (int k = 0; k < n; ++k) s[k] = r[k] - alpha * vv[k];
        if (detail::nrm2(s) / bnorm <= opt.tol) {
            for (int k = 0; k < n; ++k) res.x[k] += alpha * ph[k];
            ++it;
            const double tr = detail::true_relative_residual(op, res.x, rhs, bnorm);
            if (tr <= opt.tol) break;
            restart();
            continue;
        }
        for (int k = 0; k < n; ++k) sh[k] = dinv[k] * s[k];
        op.apply(sh, t);
        const double tt = detail::dot(t, t);
        if (tt == 0.0) {
            if (restarted) break;
            restarted = true;
            restart();
            rho = alpha = omega = 1.0;
            continue;
        }
        omega = detail::dot(t, s) / tt;
        for (int k = 0; k < n; ++k) res.x[k] += alpha * ph[k] + omega * sh[k];
        for (int k = 0; k < n; ++k) r[k] = s[k] - omega * t[k];
        ++it;
        if (detail::nrm2(r) / bnorm <= opt.tol) {
            const double tr = detail::true_relative_residual(op, res.x, rhs, bnorm);
            if (tr <= opt.tol) break;
            restart();
        }
    }
    res.stats.iterations = it;
    res.stats.residual = detail::true_relative_residual(op, res.x, rhs, bnorm);
    res.stats.converged = res.stats.residual <= opt.tol;
    return res;
}

}  // namespace rothe
