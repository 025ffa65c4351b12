#include "crossdiff/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace crossdiff {

void LinearSystem::apply(const Field& x, Field& y) const {
    const Grid& g = *grid;
    for (int k = 0; k < g.cells(); ++k) y[k] = diag[k] * x[k];
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx - 1; ++i) {
            const std::size_t f = static_cast<std::size_t>(j * (g.nx - 1) + i);
            const int K = g.index(i, j), L = g.index(i + 1, j);
            y[K] -= coef.x[f] * x[L];
            y[L] -= coef.x[f] * x[K];
        }
    if (g.dim == 2)
        for (int j = 0; j < g.ny - 1; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t f = static_cast<std::size_t>(j * g.nx + i);
                const int K = g.index(i, j), L = g.index(i, j + 1);
                y[K] -= coef.y[f] * x[L];
                y[L] -= coef.y[f] * x[K];
            }
}

LinearSystem make_backward_euler_system(const Grid& grid, double inv_dt,
                                        const FaceField* transport, double eps) {
    LinearSystem sys;
    sys.grid = &grid;
    sys.diag = Field(grid, inv_dt);
    sys.coef = FaceField(grid);
    sys.rhs = Field(grid);

    const double ax = 1.0 / (grid.hx * grid.hx);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx - 1; ++i) {
            const std::size_t f = static_cast<std::size_t>(j * (grid.nx - 1) + i);
            const double c = ((transport ? transport->x[f] : 0.0) + eps) * ax;
            sys.coef.x[f] = c;
            sys.diag[grid.index(i, j)] += c;
            sys.diag[grid.index(i + 1, j)] += c;
        }
    if (grid.dim == 2) {
        const double ay = 1.0 / (grid.hy * grid.hy);
        for (int j = 0; j < grid.ny - 1; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const std::size_t f = static_cast<std::size_t>(j * grid.nx + i);
                const double c = ((transport ? transport->y[f] : 0.0) + eps) * ay;
                sys.coef.y[f] = c;
                sys.diag[grid.index(i, j)] += c;
                sys.diag[grid.index(i, j + 1)] += c;
            }
    }
    return sys;
}

SolveResult solve_thomas(const LinearSystem& sys, Field& x) {
    const Grid& g = *sys.grid;
    if (g.dim != 1) throw std::invalid_argument("solve_thomas: 1D systems only");
    const int n = g.cells();

    std::vector<double> c(static_cast<std::size_t>(n), 0.0);   // modified superdiag
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);   // modified rhs

    double piv = sys.diag[0];
    c[0] = (n > 1 ? -sys.coef.x[0] : 0.0) / piv;
    d[0] = sys.rhs[0] / piv;
    for (int i = 1; i < n; ++i) {
        const double a = -sys.coef.x[static_cast<std::size_t>(i - 1)];   // subdiagonal
        const double b = (i < n - 1) ? -sys.coef.x[static_cast<std::size_t>(i)] : 0.0;
        piv = sys.diag[i] - a * c[static_cast<std::size_t>(i - 1)];
        c[static_cast<std::size_t>(i)] = b / piv;
        d[static_cast<std::size_t>(i)] =
            (sys.rhs[i] - a * d[static_cast<std::size_t>(i - 1)]) / piv;
    }
    x[n - 1] = d[static_cast<std::size_t>(n - 1)];
    for (int i = n - 2; i >= 0; --i)
        x[i] = d[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)] * x[i + 1];

    // report the true relative residual
    Field r(g);
    sys.apply(x, r);
    double rn = 0.0, bn = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = sys.rhs[k] - r[k];
        rn += e * e;
        bn += sys.rhs[k] * sys.rhs[k];
    }
    SolveResult res;
    res.iterations = 1;
    res.residual = bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
    res.converged = true;
    return res;
}

namespace {

double dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return s;
}

}  // namespace

SolveResult solve_pcg(const LinearSystem& sys, Field& x, double rel_tol, int max_iterations) {
    const Grid& g = *sys.grid;
    const int n = g.cells();
    if (max_iterations <= 0) max_iterations = 10 * n;

    Field r(g), z(g), p(g), Ap(g);
    const double bnorm = std::sqrt(dot(sys.rhs, sys.rhs));
    const double target = rel_tol * (bnorm > 0.0 ? bnorm : 1.0);

    SolveResult res;
    for (int restart = 0; restart < 4; ++restart) {
        sys.apply(x, r);
        for (int k = 0; k < n; ++k) r[k] = sys.rhs[k] - r[k];
        double rnorm = std::sqrt(dot(r, r));
        if (rnorm <= target) {
            res.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
            res.converged = true;
            return res;
        }

        for (int k = 0; k < n; ++k) z[k] = r[k] / sys.diag[k];
        p = z;
        double rz = dot(r, z);
        double prev_rnorm = rnorm;
        int stagnant = 0;

        while (res.iterations < max_iterations) {
            sys.apply(p, Ap);
            const double pAp = dot(p, Ap);
            if (!(pAp > 0.0)) break;   // numerically singular direction
            const double alpha = rz / pAp;
            for (int k = 0; k < n; ++k) x[k] += alpha * p[k];
            for (int k = 0; k < n; ++k) r[k] -= alpha * Ap[k];
            ++res.iterations;

            rnorm = std::sqrt(dot(r, r));
            if (rnorm <= target) break;
            if (rnorm >= 0.999 * prev_rnorm) {
                if (++stagnant >= 8) break;   // rounding floor reached
            } else {
                stagnant = 0;
            }
            prev_rnorm = rnorm;

            for (int k = 0; k < n; ++k) z[k] = r[k] / sys.diag[k];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (int k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
        // loop back to verify against the true residual
        if (res.iterations >= max_iterations) break;
        sys.apply(x, Ap);
        double tn = 0.0;
        for (int k = 0; k < n; ++k) {
            const double e = sys.rhs[k] - Ap[k];
            tn += e * e;
        }
        tn = std::sqrt(tn);
        if (tn <= target || stagnant >= 8) {
            res.residual = bnorm > 0.0 ? tn / bnorm : tn;
            res.converged = tn <= target * 4.0;   // accept the rounding floor
            return res;
        }
    }

    sys.apply(x, Ap);
    double tn = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = sys.rhs[k] - Ap[k];
        tn += e * e;
    }
    res.residual = bnorm > 0.0 ? std::sqrt(tn) / bnorm : std::sqrt(tn);
    res.converged = res.residual <= rel_tol * 4.0;
    return res;
}

SolveResult solve_spd(const LinearSystem& sys, Field& x, double rel_tol) {
    if (sys.grid->dim == 1) return solve_thomas(sys, x);
    return solve_pcg(sys, x, rel_tol);
}

}  // namespace crossdiff
