#include "crossdiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace crossdiff {

Grid make_grid(int dim, const std::vector<int>& extents, const std::vector<double>& lengths,
               const std::vector<double>& origin) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("make_grid: dim must be 1 or 2");
    if (extents.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("make_grid: extents size must equal dim");
    if (lengths.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("make_grid: lengths size must equal dim");
    if (!origin.empty() && origin.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("make_grid: origin size must equal dim");
    for (int a = 0; a < dim; ++a) {
        if (extents[a] < 2)
            throw std::invalid_argument("make_grid: need at least 2 cells per axis");
        if (!(lengths[a] > 0.0))
            throw std::invalid_argument("make_grid: lengths must be positive");
    }

    Grid g;
    g.dim = dim;
    g.nx = extents[0];
    g.hx = lengths[0] / extents[0];
    g.x0 = origin.empty() ? 0.0 : origin[0];
    if (dim == 2) {
        g.ny = extents[1];
        g.hy = lengths[1] / extents[1];
        g.y0 = origin.empty() ? 0.0 : origin[1];
    } else {
        g.ny = 1;
        g.hy = 1.0;
        g.y0 = 0.0;
    }
    return g;
}

double field_min(const Field& f) {
    return *std::min_element(f.v.begin(), f.v.end());
}

double field_max(const Field& f) {
    return *std::max_element(f.v.begin(), f.v.end());
}

double max_norm(const Field& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::fabs(x));
    return m;
}

double max_norm_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::fabs(a.v[k] - b.v[k]));
    return m;
}

bool all_finite(const Field& f) {
    for (double x : f.v)
        if (!std::isfinite(x)) return false;
    return true;
}

double cell_sum(const Field& f, const Grid& grid) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * grid.cell_volume();
}

namespace {

double pow_fast(double x, double e) {
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 0.5) return std::sqrt(x);
    return std::pow(x, e);
}

}  // namespace

FaceMobility face_mobilities(const Field& u1, const Field& u2, const Field& w,
                             double mu, double nu, double gamma, const Grid& grid) {
    FaceMobility m;
    m.species1 = FaceField(grid);
    m.species2 = FaceField(grid);
    m.combined = FaceField(grid);
    const double gm1 = gamma - 1.0;

    auto face = [&](int K, int L) {
        const double wf = pow_fast(0.5 * (w[K] + w[L]), gm1);
        const double s1 = 0.5 * (u1[K] + u1[L]) * wf;
        const double s2 = 0.5 * (u2[K] + u2[L]) * wf;
        return std::array<double, 3>{s1, s2, mu * s1 + nu * s2};
    };

    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx - 1; ++i) {
            const std::size_t f = static_cast<std::size_t>(j * (grid.nx - 1) + i);
            const int K = grid.index(i, j), L = grid.index(i + 1, j);
            auto [s1, s2, sc] = face(K, L);
            m.species1.x[f] = s1;
            m.species2.x[f] = s2;
            m.combined.x[f] = sc;
        }
    if (grid.dim == 2)
        for (int j = 0; j < grid.ny - 1; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const std::size_t f = static_cast<std::size_t>(j * grid.nx + i);
                const int K = grid.index(i, j), L = grid.index(i, j + 1);
                auto [s1, s2, sc] = face(K, L);
                m.species1.y[f] = s1;
                m.species2.y[f] = s2;
                m.combined.y[f] = sc;
            }
    return m;
}

Field div_flux(const FaceField& mob, const Field& w, double gamma, const Grid& grid) {
    Field wg(grid);
    for (std::size_t k = 0; k < w.v.size(); ++k) wg.v[k] = pow_fast(w[k], gamma);

    Field out(grid);
    const double ax = 1.0 / (grid.hx * grid.hx);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx - 1; ++i) {
            const std::size_t f = static_cast<std::size_t>(j * (grid.nx - 1) + i);
            const int K = grid.index(i, j), L = grid.index(i + 1, j);
            const double flux = mob.x[f] * (wg[L] - wg[K]) * ax;
            out[K] += flux;
            out[L] -= flux;
        }
    if (grid.dim == 2) {
        const double ay = 1.0 / (grid.hy * grid.hy);
        for (int j = 0; j < grid.ny - 1; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const std::size_t f = static_cast<std::size_t>(j * grid.nx + i);
                const int K = grid.index(i, j), L = grid.index(i, j + 1);
                const double flux = mob.y[f] * (wg[L] - wg[K]) * ay;
                out[K] += flux;
                out[L] -= flux;
            }
    }
    return out;
}

Field laplacian(const Field& f, const Grid& grid) {
    FaceField unit(grid, 1.0);
    return div_flux(unit, f, 1.0, grid);
}

void write_field_csv(std::ostream& os, const Grid& grid, const Field& f) {
    char buf[96];
    os << (grid.dim == 1 ? "index,x,value\n" : "index,x,y,value\n");
    for (int k = 0; k < grid.cells(); ++k) {
        const auto c = grid.center(k);
        if (grid.dim == 1)
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, c[0], f[k]);
        else
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", k, c[0], c[1], f[k]);
        os << buf;
    }
}

}  // namespace crossdiff
