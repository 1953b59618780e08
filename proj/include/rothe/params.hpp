#pragma once

/// @file params.hpp
/// @brief Physical and scheme parameters plus the constitutive functions:
///        the density cutoff K, the modified pressure P, and the barotropic
///        pressure law.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rothe {

/// All scalar constants of the scheme. Everything downstream takes a Params
/// by const reference; instances are immutable once validated.
struct Params {
    double mu = 1.0;        ///< shear viscosity, > 0
    double nu = 0.0;        ///< bulk viscosity coefficient, 2*mu + 3*nu > 0
    double gamma = 3.0;     ///< adiabatic exponent, > 2
    double friction = 0.0;  ///< boundary friction coefficient, >= 0
    double dt = 0.01;       ///< time step, > 0
    double eps = 2.44140625e-4;  ///< density regularization, > 0
    double m1 = 3.0;        ///< lower cutoff threshold, m2 - m1 == 1
    double m2 = 4.0;        ///< upper cutoff threshold (transport off above)

    double domain_lx = 1.0;
    double domain_ly = 1.0;
    int nx = 64;
    int ny = 64;

    double fp_tol = 1e-9;    ///< fixed-point relative-update tolerance
    int fp_max_iter = 200;   ///< outer fixed-point iteration cap (per attempt)
    double lin_tol = 1e-10;  ///< linear solver relative residual tolerance
    double theta = 0.7;      ///< fixed-point damping factor, in (0, 1]

    double alpha() const { return 1.0 / dt; }
    double hx() const { return domain_lx / nx; }
    double hy() const { return domain_ly / ny; }

    /// Collects every violated invariant; empty means valid.
    std::vector<std::string> validate() const {
        std::vector<std::string> bad;
        auto fail = [&bad](const std::string& m) { bad.push_back(m); };
        if (!(mu > 0.0)) fail("mu must be > 0");
        if (!(2.0 * mu + 3.0 * nu > 0.0)) fail("2*mu + 3*nu must be > 0");
        if (!(gamma > 2.0)) fail("gamma must be > 2");
        if (!(friction >= 0.0)) fail("friction must be >= 0");
        if (!(dt > 0.0)) fail("dt must be > 0");
        if (!(eps > 0.0)) fail("eps must be > 0");
        if (m2 - m1 != 1.0) fail("m2 - m1 must equal 1 exactly");
        if (!(m1 > 0.0)) fail("m1 must be > 0");
        if (nx < 4 || ny < 4) fail("nx and ny must be >= 4");
        if (!(domain_lx > 0.0 && domain_ly > 0.0)) fail("domain side lengths must be > 0");
        if (!(fp_tol > 0.0)) fail("fp_tol must be > 0");
        if (fp_max_iter < 1) fail("fp_max_iter must be >= 1");
        if (!(lin_tol > 0.0)) fail("lin_tol must be > 0");
        if (!(theta > 0.0 && theta <= 1.0)) fail("theta must be in (0, 1]");
        return bad;
    }

    /// Throws std::invalid_argument listing every violated invariant.
    void require_valid() const {
        auto bad = validate();
        if (bad.empty()) return;
        std::string msg = "invalid parameters:";
        for (const auto& m : bad) msg += "\n  - " + m;
        throw std::invalid_argument(msg);
    }
};

/// C1 cutoff: 1 below m1, 0 above m2, strictly decreasing cubic in between.
inline double cutoff(const Params& p, double s) {
    if (s <= p.m1) return 1.0;
    if (s >= p.m2) return 0.0;
    const double t = (s - p.m1) / (p.m2 - p.m1);
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

/// Exact derivative of cutoff(); zero outside [m1, m2], negative inside.
inline double cutoff_derivative(const Params& p, double s) {
    if (s <= p.m1 || s >= p.m2) return 0.0;
    const double w = p.m2 - p.m1;
    const double t = (s - p.m1) / w;
    return -6.0 * t * (1.0 - t) / w;
}

namespace detail {

/// Antiderivative of gamma * t^(gamma-1) * K(t) on the transition band,
/// obtained by expanding K into powers of t and integrating termwise.
inline double band_antiderivative(const Params& p, double t) {
    const double g = p.gamma;
    const double m1 = p.m1;
    const double c0 = 1.0 - 3.0 * m1 * m1 - 2.0 * m1 * m1 * m1;
    const double c1 = 6.0 * m1 * (1.0 + m1);
    const double c2 = -3.0 * (1.0 + 2.0 * m1);
    const double c3 = 2.0;
    return c0 * std::pow(t, g) + g * c1 * std::pow(t, g + 1.0) / (g + 1.0) +
           g * c2 * std::pow(t, g + 2.0) / (g + 2.0) +
           g * c3 * std::pow(t, g + 3.0) / (g + 3.0);
}

}  // namespace detail

/// Modified pressure P(s) = gamma * integral_0^s t^(gamma-1) K(t) dt,
/// evaluated in closed form. Nondecreasing; equals s^gamma up to m1 and is
/// constant from m2 on.
inline double modified_pressure(const Params& p, double s) {
    if (s < 0.0) throw std::domain_error("modified_pressure: negative density");
    if (s <= p.m1) return std::pow(s, p.gamma);
    const double base = std::pow(p.m1, p.gamma);
    const double upper = (s < p.m2) ? s : p.m2;
    return base + detail::band_antiderivative(p, upper) -
           detail::band_antiderivative(p, p.m1);
}

/// Barotropic pressure law s^gamma.
inline double physical_pressure(const Params& p, double s) {
    if (s < 0.0) throw std::domain_error("physical_pressure: negative density");
    return std::pow(s, p.gamma);
}

}  // namespace rothe
