#pragma once

/// @file operators.hpp
/// @brief Discrete differential operators and integral functionals on the MAC
///        grid. gradient() is the exact negative adjoint of divergence() under
///        the cell/face inner products, which the energy bookkeeping relies on.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rothe/grid.hpp"

namespace rothe {

/// Conservative cell divergence of a face field.
inline ScalarField divergence(const VectorField& v) {
    const Grid& g = v.grid;
    ScalarField d(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            d.at(i, j) = (v.uat(i + 1, j) - v.uat(i, j)) / g.hx +
                         (v.vat(i, j + 1) - v.vat(i, j)) / g.hy;
    return d;
}

/// Face gradient of a cell field; boundary normal faces carry zero so the
/// output is admissible and summation by parts is exact.
inline VectorField gradient(const ScalarField& p) {
    const Grid& g = p.grid;
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.uat(i, j) = (p.at(i, j) - p.at(i - 1, j)) / g.hx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.vat(i, j) = (p.at(i, j) - p.at(i, j - 1)) / g.hy;
    return out;
}

inline double integrate(const ScalarField& p) {
    double s = 0.0;
    for (double x : p.v) s += x;
    return s * p.grid.cell_volume();
}

inline double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "inner(scalar)");
    double s = 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return s * a.grid.cell_volume();
}

inline double inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "inner(vector)");
    double s = 0.0;
    for (size_t k = 0; k < a.u.size(); ++k) s += a.u[k] * b.u[k];
    for (size_t k = 0; k < a.vy.size(); ++k) s += a.vy[k] * b.vy[k];
    return s * a.grid.cell_volume();
}

inline double l2_norm(const VectorField& a) { return std::sqrt(inner(a, a)); }

/// Midpoint-rule Lq norm; q = infinity returns the max magnitude.
inline double lp_norm(const ScalarField& p, double q) {
    if (q < 1.0) throw std::invalid_argument("lp_norm: exponent must be >= 1");
    if (std::isinf(q)) {
        double m = 0.0;
        for (double x : p.v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : p.v) s += std::pow(std::abs(x), q);
    return std::pow(s * p.grid.cell_volume(), 1.0 / q);
}

// ---------------------------------------------------------------------------
// Corner quantities. Corners are indexed (i, j), i in [0, nx], j in [0, ny].
// Tangential derivatives across a wall use a one-sided quadratic fit so corner
// stencils stay second order at the boundary.
// ---------------------------------------------------------------------------

namespace detail {

/// d/dn at the wall from samples at distances h/2, 3h/2, 5h/2.
inline double onesided_wall_derivative(double f0, double f1, double f2, double h) {
    return (-2.0 * f0 + 3.0 * f1 - f2) / h;
}

/// du/dy at corner (i, j) for the u component.
inline double corner_du_dy(const VectorField& v, int i, int j) {
    const Grid& g = v.grid;
    if (j >= 1 && j <= g.ny - 1) return (v.uat(i, j) - v.uat(i, j - 1)) / g.hy;
    if (j == 0)
        return onesided_wall_derivative(v.uat(i, 0), v.uat(i, 1), v.uat(i, 2), g.hy);
    return -onesided_wall_derivative(v.uat(i, g.ny - 1), v.uat(i, g.ny - 2),
                                     v.uat(i, g.ny - 3), g.hy);
}

/// dv/dx at corner (i, j) for the v component.
inline double corner_dv_dx(const VectorField& v, int i, int j) {
    const Grid& g = v.grid;
    if (i >= 1 && i <= g.nx - 1) return (v.vat(i, j) - v.vat(i - 1, j)) / g.hx;
    if (i == 0)
        return onesided_wall_derivative(v.vat(0, j), v.vat(1, j), v.vat(2, j), g.hx);
    return -onesided_wall_derivative(v.vat(g.nx - 1, j), v.vat(g.nx - 2, j),
                                     v.vat(g.nx - 3, j), g.hx);
}

}  // namespace detail

/// Discrete curl at every corner, (nx+1) x (ny+1), index j*(nx+1)+i.
inline std::vector<double> rot_corners(const VectorField& v) {
    const Grid& g = v.grid;
    std::vector<double> w(static_cast<size_t>(g.nx + 1) * (g.ny + 1));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            w[static_cast<size_t>(j) * (g.nx + 1) + i] =
                detail::corner_dv_dx(v, i, j) - detail::corner_du_dy(v, i, j);
    return w;
}

/// Curl averaged from the four cell corners to cell centers.
inline ScalarField rot(const VectorField& v) {
    const Grid& g = v.grid;
    const auto w = rot_corners(v);
    auto at = [&](int i, int j) { return w[static_cast<size_t>(j) * (g.nx + 1) + i]; };
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) =
                0.25 * (at(i, j) + at(i + 1, j) + at(i, j + 1) + at(i + 1, j + 1));
    return out;
}

/// Integral of |D(v)|^2 with the symmetric gradient evaluated at cell centers
/// (diagonal entries) and corners (off-diagonal entry).
inline double sym_grad_energy(const VectorField& v) {
    const Grid& g = v.grid;
    const double vol = g.cell_volume();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double ux = (v.uat(i + 1, j) - v.uat(i, j)) / g.hx;
            const double vy = (v.vat(i, j + 1) - v.vat(i, j)) / g.hy;
            s += (ux * ux + vy * vy) * vol;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double mix = detail::corner_du_dy(v, i, j) + detail::corner_dv_dx(v, i, j);
            // trapezoidal corner weights: boundary rows/columns count half
            double w = 1.0;
            if (i == 0 || i == g.nx) w *= 0.5;
            if (j == 0 || j == g.ny) w *= 0.5;
            s += 0.5 * mix * mix * vol * w;
        }
    return s;
}

// ---------------------------------------------------------------------------
// Averaging between cells and faces. These two maps are adjoint; the energy
// identity uses that fact, so they must stay in sync.
// ---------------------------------------------------------------------------

/// Arithmetic average of a cell field onto interior faces (boundary faces 0).
inline VectorField face_average(const ScalarField& c) {
    const Grid& g = c.grid;
    VectorField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            f.uat(i, j) = 0.5 * (c.at(i - 1, j) + c.at(i, j));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.vat(i, j) = 0.5 * (c.at(i, j - 1) + c.at(i, j));
    return f;
}

/// Adjoint of face_average applied to the squared field: at each cell, half
/// the sum of its four face values squared. Boundary faces enter as stored.
inline ScalarField face_square_average(const VectorField& v) {
    const Grid& g = v.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double ul = v.uat(i, j), ur = v.uat(i + 1, j);
            const double vb = v.vat(i, j), vt = v.vat(i, j + 1);
            out.at(i, j) = 0.5 * (ul * ul + ur * ur + vb * vb + vt * vt);
        }
    return out;
}

/// Pointwise product average: cell value = half-sum of products of the two
/// fields over the four faces. Adjoint partner of face_average for bilinear
/// pairings.
inline ScalarField face_product_average(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "face_product_average");
    const Grid& g = a.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) = 0.5 * (a.uat(i, j) * b.uat(i, j) + a.uat(i + 1, j) * b.uat(i + 1, j) +
                                  a.vat(i, j) * b.vat(i, j) + a.vat(i, j + 1) * b.vat(i, j + 1));
    return out;
}

// ---------------------------------------------------------------------------
// Neumann (no-flux) Laplacian pieces for cell fields.
// ---------------------------------------------------------------------------

/// Five-point Laplacian with homogeneous Neumann walls.
inline ScalarField neumann_laplacian(const ScalarField& a) {
    const Grid& g = a.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double s = 0.0;
            if (i > 0) s += (a.at(i - 1, j) - a.at(i, j)) / (g.hx * g.hx);
            if (i < g.nx - 1) s += (a.at(i + 1, j) - a.at(i, j)) / (g.hx * g.hx);
            if (j > 0) s += (a.at(i, j - 1) - a.at(i, j)) / (g.hy * g.hy);
            if (j < g.ny - 1) s += (a.at(i, j + 1) - a.at(i, j)) / (g.hy * g.hy);
            out.at(i, j) = s;
        }
    return out;
}

/// <grad a, grad b> over interior cell interfaces (no-flux walls). Equals
/// -<neumann_laplacian(a), b> exactly.
inline double neumann_grad_pair(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "neumann_grad_pair");
    const Grid& g = a.grid;
    const double vol = g.cell_volume();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            s += (a.at(i, j) - a.at(i - 1, j)) * (b.at(i, j) - b.at(i - 1, j)) / (g.hx * g.hx);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            s += (a.at(i, j) - a.at(i, j - 1)) * (b.at(i, j) - b.at(i, j - 1)) / (g.hy * g.hy);
    return s * vol;
}

// ---------------------------------------------------------------------------
// Boundary tangential trace.
// ---------------------------------------------------------------------------

/// Tangential velocity along each wall, sampled at the wall feet of the
/// nearest interior faces (corner segments carry no mass). Weight is the
/// arc length per sample.
struct BoundaryTrace {
    std::vector<double> bottom, top;  ///< u at x = i*hx, i in [1, nx-1]
    std::vector<double> left, right;  ///< v at y = j*hy, j in [1, ny-1]
    double wx = 0.0;                  ///< weight for bottom/top samples
    double wy = 0.0;                  ///< weight for left/right samples

    double max_abs() const {
        double m = 0.0;
        for (const auto* a : {&bottom, &top, &left, &right})
            for (double x : *a) m = std::max(m, std::abs(x));
        return m;
    }

    /// integral over the boundary of weight * trace^2
    double square_integral(double coeff = 1.0) const {
        double s = 0.0;
        for (double x : bottom) s += x * x * wx;
        for (double x : top) s += x * x * wx;
        for (double x : left) s += x * x * wy;
        for (double x : right) s += x * x * wy;
        return coeff * s;
    }
};

inline BoundaryTrace boundary_tangential_trace(const VectorField& v) {
    const Grid& g = v.grid;
    BoundaryTrace t;
    t.wx = g.hx;
    t.wy = g.hy;
    t.bottom.resize(g.nx - 1);
    t.top.resize(g.nx - 1);
    for (int i = 1; i < g.nx; ++i) {
        t.bottom[i - 1] = v.uat(i, 0);
        t.top[i - 1] = v.uat(i, g.ny - 1);
    }
    t.left.resize(g.ny - 1);
    t.right.resize(g.ny - 1);
    for (int j = 1; j < g.ny; ++j) {
        t.left[j - 1] = v.vat(0, j);
        t.right[j - 1] = v.vat(g.nx - 1, j);
    }
    return t;
}

}  // namespace rothe
