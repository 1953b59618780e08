#pragma once

/// @file grid.hpp
/// @brief Staggered (MAC) grid on a rectangle: scalars at cell centers,
///        velocity components on faces. Includes the text dump format shared
///        with the harness.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rothe {

/// Structured rectangle grid. Spacings are primary so that dumps round-trip
/// exactly; side lengths are derived.
struct Grid {
    int nx = 0;
    int ny = 0;
    double hx = 0.0;
    double hy = 0.0;

    Grid() = default;
    Grid(int nx_, int ny_, double lx, double ly)
        : nx(nx_), ny(ny_), hx(lx / nx_), hy(ly / ny_) {
        if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx, ny must be >= 4");
        if (!(hx > 0.0 && hy > 0.0)) throw std::invalid_argument("Grid: spacings must be > 0");
    }
    static Grid from_spacing(int nx_, int ny_, double hx_, double hy_) {
        Grid g;
        g.nx = nx_;
        g.ny = ny_;
        g.hx = hx_;
        g.hy = hy_;
        if (g.nx < 4 || g.ny < 4) throw std::invalid_argument("Grid: nx, ny must be >= 4");
        if (!(g.hx > 0.0 && g.hy > 0.0)) throw std::invalid_argument("Grid: spacings must be > 0");
        return g;
    }

    double lx() const { return nx * hx; }
    double ly() const { return ny * hy; }
    double cell_volume() const { return hx * hy; }

    double xc(int i) const { return (i + 0.5) * hx; }  ///< cell-center x
    double yc(int j) const { return (j + 0.5) * hy; }  ///< cell-center y
    double xf(int i) const { return i * hx; }          ///< vertical-face x
    double yf(int j) const { return j * hy; }          ///< horizontal-face y

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && hx == o.hx && hy == o.hy;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

/// Cell-centered scalar field, row-major (row = y index).
struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), v(static_cast<size_t>(g.nx) * g.ny, fill) {}

    double& at(int i, int j) { return v[static_cast<size_t>(j) * grid.nx + i]; }
    double at(int i, int j) const { return v[static_cast<size_t>(j) * grid.nx + i]; }
    size_t size() const { return v.size(); }
};

/// Face-staggered velocity field: u on vertical faces ((nx+1) x ny), v on
/// horizontal faces (nx x (ny+1)). A field is admissible when its boundary
/// normal faces are exactly zero.
struct VectorField {
    Grid grid;
    std::vector<double> u;   ///< x-component, index j*(nx+1)+i, i in [0,nx]
    std::vector<double> vy;  ///< y-component, index j*nx+i, j in [0,ny]

    VectorField() = default;
    explicit VectorField(const Grid& g)
        : grid(g),
          u(static_cast<size_t>(g.nx + 1) * g.ny, 0.0),
          vy(static_cast<size_t>(g.nx) * (g.ny + 1), 0.0) {}

    double& uat(int i, int j) { return u[static_cast<size_t>(j) * (grid.nx + 1) + i]; }
    double uat(int i, int j) const { return u[static_cast<size_t>(j) * (grid.nx + 1) + i]; }
    double& vat(int i, int j) { return vy[static_cast<size_t>(j) * grid.nx + i]; }
    double vat(int i, int j) const { return vy[static_cast<size_t>(j) * grid.nx + i]; }

    /// Zeroes the boundary normal faces.
    void project_admissible() {
        for (int j = 0; j < grid.ny; ++j) {
            uat(0, j) = 0.0;
            uat(grid.nx, j) = 0.0;
        }
        for (int i = 0; i < grid.nx; ++i) {
            vat(i, 0) = 0.0;
            vat(i, grid.ny) = 0.0;
        }
    }

    bool is_admissible(double tol = 0.0) const {
        for (int j = 0; j < grid.ny; ++j)
            if (std::abs(uat(0, j)) > tol || std::abs(uat(grid.nx, j)) > tol) return false;
        for (int i = 0; i < grid.nx; ++i)
            if (std::abs(vat(i, 0)) > tol || std::abs(vat(i, grid.ny)) > tol) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Field dump format: header line "nx ny hx hy kind", then one row of decimal
// values per line, 17 significant digits (exact double round trip).
// kind "rho"-like fields are nx*ny, kind "u" is (nx+1)*ny, kind "v" is
// nx*(ny+1).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_rows(std::ostream& os, const std::vector<double>& vals, int per_row) {
    const int rows = static_cast<int>(vals.size()) / per_row;
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < per_row; ++i) {
            if (i) os << ' ';
            os << fmt17(vals[static_cast<size_t>(j) * per_row + i]);
        }
        os << '\n';
    }
}

}  // namespace detail

struct FieldDump {
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    std::string kind;
    std::vector<double> values;
};

inline void dump_field(std::ostream& os, const Grid& g, const std::string& kind,
                       const std::vector<double>& vals, int per_row) {
    os << g.nx << ' ' << g.ny << ' ' << detail::fmt17(g.hx) << ' ' << detail::fmt17(g.hy)
       << ' ' << kind << '\n';
    detail::write_rows(os, vals, per_row);
}

inline void dump_scalar(const std::string& path, const ScalarField& f,
                        const std::string& kind = "rho") {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dump_scalar: cannot open " + path);
    dump_field(os, f.grid, kind, f.v, f.grid.nx);
}

inline void dump_vector(const std::string& path_u, const std::string& path_v,
                        const VectorField& f) {
    std::ofstream osu(path_u);
    if (!osu) throw std::runtime_error("dump_vector: cannot open " + path_u);
    dump_field(osu, f.grid, "u", f.u, f.grid.nx + 1);
    std::ofstream osv(path_v);
    if (!osv) throw std::runtime_error("dump_vector: cannot open " + path_v);
    dump_field(osv, f.grid, "v", f.vy, f.grid.nx);
}

inline FieldDump read_dump(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_dump: cannot open " + path);
    FieldDump d;
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("read_dump: empty file " + path);
    std::istringstream hs(header);
    if (!(hs >> d.nx >> d.ny >> d.hx >> d.hy >> d.kind))
        throw std::runtime_error("read_dump: bad header in " + path);
    size_t expect;
    if (d.kind == "u")
        expect = static_cast<size_t>(d.nx + 1) * d.ny;
    else if (d.kind == "v")
        expect = static_cast<size_t>(d.nx) * (d.ny + 1);
    else
        expect = static_cast<size_t>(d.nx) * d.ny;
    d.values.reserve(expect);
    double x;
    while (is >> x) d.values.push_back(x);
    if (d.values.size() != expect)
        throw std::runtime_error("read_dump: value count mismatch in " + path);
    return d;
}

inline ScalarField scalar_from_dump(const FieldDump& d) {
    if (d.kind == "u" || d.kind == "v")
        throw std::invalid_argument("scalar_from_dump: dump holds a velocity component");
    ScalarField f(Grid::from_spacing(d.nx, d.ny, d.hx, d.hy));
    f.v = d.values;
    return f;
}

inline VectorField vector_from_dumps(const FieldDump& du, const FieldDump& dv) {
    if (du.kind != "u" || dv.kind != "v")
        throw std::invalid_argument("vector_from_dumps: kinds must be u and v");
    if (du.nx != dv.nx || du.ny != dv.ny || du.hx != dv.hx || du.hy != dv.hy)
        throw std::invalid_argument("vector_from_dumps: component grids differ");
    VectorField f(Grid::from_spacing(du.nx, du.ny, du.hx, du.hy));
    f.u = du.values;
    f.vy = dv.values;
    return f;
}

}  // namespace rothe
