/// Grid operator tests: exactness on constants/linears, summation-by-parts
/// adjointness, refinement rates on manufactured fields, trace and norm
/// functionals, dump round trips.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "rothe/grid.hpp"
#include "rothe/operators.hpp"

using namespace rothe;

namespace {

constexpr double kPi = 3.14159265358979323846;

VectorField sample_velocity(const Grid& g, const std::function<double(double, double)>& fu,
                            const std::function<double(double, double)>& fv) {
    VectorField v(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) v.uat(i, j) = fu(g.xf(i), g.yc(j));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.vat(i, j) = fv(g.xc(i), g.yf(j));
    return v;
}

ScalarField sample_scalar(const Grid& g, const std::function<double(double, double)>& f) {
    ScalarField s(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) s.at(i, j) = f(g.xc(i), g.yc(j));
    return s;
}

VectorField random_admissible(const Grid& g, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorField v(g);
    for (auto& x : v.u) x = dist(rng);
    for (auto& x : v.vy) x = dist(rng);
    v.project_admissible();
    return v;
}

double fit_rate(const std::vector<double>& hs, const std::vector<double>& errs) {
    // least squares slope of log(err) against log(h)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(hs.size());
    for (int k = 0; k < n; ++k) {
        const double x = std::log(hs[k]), y = std::log(errs[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("divergence annihilates constants and linear solenoidal fields") {
    const Grid g(16, 12, 1.0, 1.0);
    auto c = sample_velocity(g, [](double, double) { return 0.7; },
                             [](double, double) { return -0.3; });
    for (double d : divergence(c).v) CHECK(std::abs(d) <= 1e-14);

    auto lin = sample_velocity(g, [](double x, double) { return x; },
                               [](double, double y) { return -y; });
    for (double d : divergence(lin).v) CHECK(std::abs(d) <= 1e-13);
}

TEST_CASE("divergence second-order on a manufactured field") {
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const Grid g(n, n, 1.0, 1.0);
        auto v = sample_velocity(g, [](double x, double y) { return std::sin(kPi * x) * std::cos(kPi * y); },
                                 [](double, double) { return 0.0; });
        const ScalarField d = divergence(v);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double exact = kPi * std::cos(kPi * g.xc(i)) * std::cos(kPi * g.yc(j));
                err = std::max(err, std::abs(d.at(i, j) - exact));
            }
        hs.push_back(g.hx);
        errs.push_back(err);
    }
    const double rate = fit_rate(hs, errs);
    CHECK(rate >= 1.8);
    CHECK(rate <= 2.2);
}

TEST_CASE("gradient: constants, linears, and adjointness to -divergence") {
    const Grid g(20, 14, 1.0, 1.0);
    auto c = sample_scalar(g, [](double, double) { return 4.2; });
    const VectorField gc = gradient(c);
    for (double x : gc.u) CHECK(x == 0.0);
    for (double x : gc.vy) CHECK(x == 0.0);

    auto lx = sample_scalar(g, [](double x, double) { return x; });
    const VectorField gl = gradient(lx);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            CHECK(gl.uat(i, j) == doctest::Approx(1.0).epsilon(1e-13));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        ScalarField p(g);
        for (auto& x : p.v) x = dist(rng);
        const VectorField v = random_admissible(g, 100 + trial);
        const double lhs = inner(gradient(p), v);
        const double rhs = inner(p, divergence(v));
        CHECK(std::abs(lhs + rhs) <= 1e-12);
    }
}

TEST_CASE("gradient second-order on interior faces") {
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const Grid g(n, n, 1.0, 1.0);
        auto p = sample_scalar(g, [](double x, double y) { return std::cos(kPi * x) * std::cos(2.0 * kPi * y); });
        const VectorField gp = gradient(p);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) {
                const double exact = -kPi * std::sin(kPi * g.xf(i)) * std::cos(2.0 * kPi * g.yc(j));
                err = std::max(err, std::abs(gp.uat(i, j) - exact));
            }
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double exact = -2.0 * kPi * std::cos(kPi * g.xc(i)) * std::sin(2.0 * kPi * g.yf(j));
                err = std::max(err, std::abs(gp.vat(i, j) - exact));
            }
        hs.push_back(g.hx);
        errs.push_back(err);
    }
    const double rate = fit_rate(hs, errs);
    CHECK(rate >= 1.8);
    CHECK(rate <= 2.2);
}

TEST_CASE("sym_grad_energy: zero field, rigid rotation, analytic value") {
    const Grid g(24, 24, 1.0, 1.0);
    CHECK(sym_grad_energy(VectorField(g)) == 0.0);

    // rigid rotation + translation has zero symmetric gradient
    auto rigid = sample_velocity(g, [](double, double y) { return -y + 0.4; },
                                 [](double x, double) { return x + 0.1; });
    CHECK(std::abs(sym_grad_energy(rigid)) <= 1e-12);

    // u = sin(pi x) sin(pi y), v = 0:
    // integral |D|^2 = int u_x^2 + u_y^2 / 2 = pi^2/4 + pi^2/8 = 3 pi^2/8
    // (n = 16 sits on an error-cancellation point, so the fit starts at 32)
    std::vector<double> hs, errs;
    for (int n : {32, 64, 128, 256}) {
        const Grid gg(n, n, 1.0, 1.0);
        auto v = sample_velocity(gg, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); },
                                 [](double, double) { return 0.0; });
        hs.push_back(gg.hx);
        errs.push_back(std::abs(sym_grad_energy(v) - 3.0 * kPi * kPi / 8.0));
    }
    CHECK(errs.back() <= 1e-4);
    CHECK(fit_rate(hs, errs) >= 1.5);
}

TEST_CASE("rot: gradient fields, rigid rotation, analytic Laplacian oracle") {
    const Grid g(24, 24, 1.0, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField p(g);
    for (auto& x : p.v) x = dist(rng);
    // discrete curl of a discrete gradient vanishes at interior corners
    const auto wc = rot_corners(gradient(p));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            CHECK(std::abs(wc[static_cast<size_t>(j) * (g.nx + 1) + i]) <= 1e-10);

    auto rigid = sample_velocity(g, [](double, double y) { return -y; },
                                 [](double x, double) { return x; });
    for (double w : rot(rigid).v) CHECK(w == doctest::Approx(2.0).epsilon(1e-12));

    // v = perp-grad(A), A = sin(pi x) sin(pi y): rot v = Lap A = -2 pi^2 A
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const Grid gg(n, n, 1.0, 1.0);
        auto v = sample_velocity(
            gg, [](double x, double y) { return -kPi * std::sin(kPi * x) * std::cos(kPi * y); },
            [](double x, double y) { return kPi * std::cos(kPi * x) * std::sin(kPi * y); });
        const ScalarField w = rot(v);
        double err = 0.0;
        for (int j = 0; j < gg.ny; ++j)
            for (int i = 0; i < gg.nx; ++i) {
                const double exact =
                    -2.0 * kPi * kPi * std::sin(kPi * gg.xc(i)) * std::sin(kPi * gg.yc(j));
                err = std::max(err, std::abs(w.at(i, j) - exact));
            }
        hs.push_back(gg.hx);
        errs.push_back(err);
    }
    const double rate = fit_rate(hs, errs);
    CHECK(rate >= 1.8);
    CHECK(rate <= 2.2);
}

TEST_CASE("integrate and lp_norm basics") {
    const Grid g(16, 16, 1.0, 1.0);
    auto one = sample_scalar(g, [](double, double) { return 1.0; });
    CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-14));

    auto c = sample_scalar(g, [](double, double) { return -2.5; });
    CHECK(lp_norm(c, 1.0) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(lp_norm(c, 3.7) == doctest::Approx(2.5).epsilon(1e-13));
    CHECK(lp_norm(c, std::numeric_limits<double>::infinity()) == 2.5);
    CHECK_THROWS_AS(lp_norm(c, 0.5), std::invalid_argument);

    // || sin(pi x) sin(pi y) ||_2 = 1/2
    const Grid gg(64, 64, 1.0, 1.0);
    auto s = sample_scalar(gg, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
    CHECK(lp_norm(s, 2.0) == doctest::Approx(0.5).epsilon(2e-4));
}

TEST_CASE("boundary tangential trace sampling and quadrature") {
    const Grid g(32, 32, 1.0, 1.0);
    CHECK(boundary_tangential_trace(VectorField(g)).max_abs() == 0.0);

    // u = 1 on the interior of the bottom row
    VectorField v(g);
    for (int i = 1; i < g.nx; ++i) v.uat(i, 0) = 1.0;
    const auto t = boundary_tangential_trace(v);
    for (double x : t.bottom) CHECK(x == 1.0);
    for (double x : t.top) CHECK(x == 0.0);

    // wall-normal-flat manufactured field: u = sin(pi x) cos(pi y) has
    // du/dy = 0 at both horizontal walls, so sampling at height h/2 is O(h^2);
    // oracle: int_0^1 sin^2(pi x) dx = 1/2 on bottom and top.
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const Grid gg(n, n, 1.0, 1.0);
        auto vv = sample_velocity(gg, [](double x, double y) { return std::sin(kPi * x) * std::cos(kPi * y); },
                                  [](double, double) { return 0.0; });
        const auto tt = boundary_tangential_trace(vv);
        double bottom = 0.0;
        for (double x : tt.bottom) bottom += x * x * tt.wx;
        hs.push_back(gg.hx);
        errs.push_back(std::abs(bottom - 0.5));
    }
    CHECK(errs.back() < errs.front());
    CHECK(fit_rate(hs, errs) >= 1.5);  // midpoint rule with omitted corner segments
}

TEST_CASE("face_average and face_square_average are adjoint") {
    const Grid g(12, 18, 1.0, 1.5);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    ScalarField rho(g);
    for (auto& x : rho.v) x = dist(rng);
    const VectorField v = random_admissible(g, 77);
    // <avg(rho), v^2>_faces == <rho, face_square_average(v)>_cells
    const VectorField rf = face_average(rho);
    double lhs = 0.0;
    for (size_t k = 0; k < rf.u.size(); ++k) lhs += rf.u[k] * v.u[k] * v.u[k];
    for (size_t k = 0; k < rf.vy.size(); ++k) lhs += rf.vy[k] * v.vy[k] * v.vy[k];
    lhs *= g.cell_volume();
    const double rhs = inner(rho, face_square_average(v));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("neumann laplacian pairs with neumann_grad_pair") {
    const Grid g(14, 10, 1.0, 1.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField a(g), b(g);
    for (auto& x : a.v) x = dist(rng);
    for (auto& x : b.v) x = dist(rng);
    CHECK(inner(neumann_laplacian(a), b) ==
          doctest::Approx(-neumann_grad_pair(a, b)).epsilon(1e-12));
}

TEST_CASE("field dumps round-trip exactly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rothe_dump_test";
    fs::create_directories(dir);

    const Grid g(8, 6, 1.0, 0.75);
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField rho(g);
    for (auto& x : rho.v) x = dist(rng);
    VectorField v(g);
    for (auto& x : v.u) x = dist(rng);
    for (auto& x : v.vy) x = dist(rng);

    dump_scalar((dir / "rho.dat").string(), rho, "rho");
    dump_vector((dir / "u.dat").string(), (dir / "v.dat").string(), v);

    const ScalarField rho2 = scalar_from_dump(read_dump((dir / "rho.dat").string()));
    CHECK(rho2.grid == g);
    for (size_t k = 0; k < rho.v.size(); ++k) CHECK(rho2.v[k] == rho.v[k]);

    const VectorField v2 = vector_from_dumps(read_dump((dir / "u.dat").string()),
                                             read_dump((dir / "v.dat").string()));
    for (size_t k = 0; k < v.u.size(); ++k) CHECK(v2.u[k] == v.u[k]);
    for (size_t k = 0; k < v.vy.size(); ++k) CHECK(v2.vy[k] == v.vy[k]);

    CHECK_THROWS_AS(read_dump((dir / "missing.dat").string()), std::runtime_error);
    fs::remove_all(dir);
}
