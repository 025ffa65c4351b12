#include "crossdiff/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace crossdiff {

DiagnosticsRecord record_diagnostics(const State& state, const Params& params,
                                     const Grid& grid) {
    DiagnosticsRecord r;
    r.t = state.t;
    r.mass_w = cell_sum(state.w, grid);
    r.mass_u1 = cell_sum(state.u1, grid);
    r.mass_u2 = cell_sum(state.u2, grid);
    r.min_u1 = field_min(state.u1);
    r.max_u1 = field_max(state.u1);
    r.min_u2 = field_min(state.u2);
    r.max_u2 = field_max(state.u2);
    r.min_w = field_min(state.w);
    r.max_w = field_max(state.w);

    const double vol = grid.cell_volume();
    double idres = 0.0, l2 = 0.0, overlap = 0.0;
    for (int k = 0; k < grid.cells(); ++k) {
        idres = std::max(idres, std::fabs(state.w[k] - state.u1[k] - state.u2[k]));
        l2 += state.w[k] * state.w[k];
        overlap += std::max(state.u1[k], 0.0) * std::max(state.u2[k], 0.0);
    }
    r.identity_residual = idres;
    r.l2_w = 0.5 * l2 * vol;
    r.overlap = overlap * vol;

    // d1: face-gradient quadrature of |grad w^{(gamma+1)/2}|^2
    Field wp(grid);
    const double ex = 0.5 * (params.gamma + 1.0);
    for (int k = 0; k < grid.cells(); ++k) wp[k] = std::pow(std::max(state.w[k], 0.0), ex);

    auto grad_sq = [&](const Field& g) {
        double s = 0.0;
        const double cx = grid.dim == 1 ? 1.0 / grid.hx : grid.hy / grid.hx;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx - 1; ++i) {
                const double d = g[grid.index(i + 1, j)] - g[grid.index(i, j)];
                s += cx * d * d;
            }
        if (grid.dim == 2) {
            const double cy = grid.hx / grid.hy;
            for (int j = 0; j < grid.ny - 1; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    const double d = g[grid.index(i, j + 1)] - g[grid.index(i, j)];
                    s += cy * d * d;
                }
        }
        return s;
    };
    r.d1 = grad_sq(wp);

    // d2: FaceMobility-consistent quadrature of (mu u1 + nu u2) w^{gamma-1} |grad w|^2
    const FaceMobility fm =
        face_mobilities(state.u1, state.u2, state.w, params.mu, params.nu, params.gamma, grid);
    double d2 = 0.0;
    {
        const double cx = grid.dim == 1 ? 1.0 / grid.hx : grid.hy / grid.hx;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx - 1; ++i) {
                const std::size_t f = static_cast<std::size_t>(j * (grid.nx - 1) + i);
                const double d = state.w[grid.index(i + 1, j)] - state.w[grid.index(i, j)];
                d2 += cx * fm.combined.x[f] * d * d;
            }
        if (grid.dim == 2) {
            const double cy = grid.hx / grid.hy;
            for (int j = 0; j < grid.ny - 1; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    const std::size_t f = static_cast<std::size_t>(j * grid.nx + i);
                    const double d = state.w[grid.index(i, j + 1)] - state.w[grid.index(i, j)];
                    d2 += cy * fm.combined.y[f] * d * d;
                }
        }
    }
    r.d2 = d2;

    // volume fractions over cells safely above the floor
    const double cut = std::max(10.0 * params.epsilon_floor(), 1e-13);
    double e1min = 1.0, e1max = 0.0, e2min = 1.0, e2max = 0.0;
    bool any = false;
    for (int k = 0; k < grid.cells(); ++k) {
        if (state.w[k] <= cut) continue;
        any = true;
        const double e1 = state.u1[k] / state.w[k];
        const double e2 = state.u2[k] / state.w[k];
        e1min = std::min(e1min, e1);
        e1max = std::max(e1max, e1);
        e2min = std::min(e2min, e2);
        e2max = std::max(e2max, e2);
    }
    if (!any) e1min = e1max = e2min = e2max = 0.0;
    r.eta1_min = e1min;
    r.eta1_max = e1max;
    r.eta2_min = e2min;
    r.eta2_max = e2max;
    return r;
}

void write_diagnostics_header(std::ostream& os) {
    os << "t,mass_w,mass_u1,mass_u2,min_u1,max_u1,min_u2,max_u2,min_w,max_w,"
          "identity_residual,l2_w,d1,d2,overlap,eta1_min,eta1_max,eta2_min,eta2_max\n";
}

void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r) {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.t, r.mass_w, r.mass_u1, r.mass_u2, r.min_u1, r.max_u1, r.min_u2, r.max_u2,
                  r.min_w, r.max_w, r.identity_residual, r.l2_w, r.d1, r.d2, r.overlap,
                  r.eta1_min, r.eta1_max, r.eta2_min, r.eta2_max);
    os << buf;
}

RunHooks capture_trajectory(Trajectory& traj) {
    RunHooks hooks;
    hooks.on_step = [&traj](int, const State& s, const StepReport&) {
        traj.states.push_back(s);
    };
    return hooks;
}

std::vector<WeakResidualRow> weak_residual(const Trajectory& traj, int max_mode,
                                           const Params& params, const GrowthModel& model,
                                           const Grid& grid) {
    if (traj.states.size() < 2)
        throw std::invalid_argument("weak_residual: trajectory needs at least two states");

    struct Mode {
        int kx, ky;
        Field phi;
    };
    std::vector<Mode> modes;
    const double pi = 3.14159265358979323846;
    const double Lx = grid.nx * grid.hx;
    const double Ly = grid.ny * grid.hy;
    const int kmaxy = grid.dim == 2 ? max_mode : 0;
    for (int kx = 0; kx <= max_mode; ++kx)
        for (int ky = 0; ky <= kmaxy; ++ky) {
            Mode m{kx, ky, Field(grid)};
            for (int c = 0; c < grid.cells(); ++c) {
                const auto p = grid.center(c);
                double v = std::cos(kx * pi * (p[0] - grid.x0) / Lx);
                if (grid.dim == 2) v *= std::cos(ky * pi * (p[1] - grid.y0) / Ly);
                m.phi[c] = v;
            }
            modes.push_back(std::move(m));
        }

    const double vol = grid.cell_volume();
    std::vector<WeakResidualRow> rows;
    for (int species = 1; species <= 2; ++species) {
        for (const Mode& mode : modes) {
            // accumulated int int (u grad w^gamma . grad phi - R phi)
            double acc = 0.0;
            for (std::size_t n = 1; n < traj.states.size(); ++n) {
                const State& s = traj.states[n];
                const double dt = s.t - traj.states[n - 1].t;
                const Field& u = species == 1 ? s.u1 : s.u2;

                Field wg(grid);
                for (int k = 0; k < grid.cells(); ++k)
                    wg[k] = std::pow(std::max(s.w[k], 0.0), params.gamma);

                double grad_term = 0.0;
                const double cx = grid.dim == 1 ? 1.0 / grid.hx : grid.hy / grid.hx;
                for (int j = 0; j < grid.ny; ++j)
                    for (int i = 0; i < grid.nx - 1; ++i) {
                        const int K = grid.index(i, j), L = grid.index(i + 1, j);
                        grad_term += cx * 0.5 * (u[K] + u[L]) * (wg[L] - wg[K]) *
                                     (mode.phi[L] - mode.phi[K]);
                    }
                if (grid.dim == 2) {
                    const double cy = grid.hx / grid.hy;
                    for (int j = 0; j < grid.ny - 1; ++j)
                        for (int i = 0; i < grid.nx; ++i) {
                            const int K = grid.index(i, j), L = grid.index(i, j + 1);
                            grad_term += cy * 0.5 * (u[K] + u[L]) * (wg[L] - wg[K]) *
                                         (mode.phi[L] - mode.phi[K]);
                        }
                }

                double react_term = 0.0;
                for (int k = 0; k < grid.cells(); ++k) {
                    const double t1 = theta_p(s.u1[k], model.w_p);
                    const double t2 = theta_p(s.u2[k], model.w_p);
                    const double tw = theta_p(s.w[k], model.w_p);
                    const auto [r1, r2] = reaction_rates(t1, t2, tw, model);
                    react_term += (species == 1 ? r1 : r2) * mode.phi[k];
                }
                react_term *= vol;

                acc += dt * (grad_term - react_term);
            }

            double boundary = 0.0;   // <u(T), phi> - <u(0), phi>
            const Field& uT = species == 1 ? traj.states.back().u1 : traj.states.back().u2;
            const Field& u0 = species == 1 ? traj.states.front().u1 : traj.states.front().u2;
            for (int k = 0; k < grid.cells(); ++k)
                boundary += (uT[k] - u0[k]) * mode.phi[k];
            boundary *= vol;

            rows.push_back({species, mode.kx, mode.ky, std::fabs(acc + boundary)});
        }
    }
    return rows;
}

double dissipation_budget(const Trajectory& traj, double gamma) {
    if (traj.states.empty()) return 0.0;
    const Grid& grid = traj.grid;
    const double ex = 0.5 * (gamma + 1.0);

    auto d1_of = [&](const State& s) {
        Field wp(grid);
        for (int k = 0; k < grid.cells(); ++k) wp[k] = std::pow(std::max(s.w[k], 0.0), ex);
        double sum = 0.0;
        const double cx = grid.dim == 1 ? 1.0 / grid.hx : grid.hy / grid.hx;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx - 1; ++i) {
                const double d = wp[grid.index(i + 1, j)] - wp[grid.index(i, j)];
                sum += cx * d * d;
            }
        if (grid.dim == 2) {
            const double cy = grid.hx / grid.hy;
            for (int j = 0; j < grid.ny - 1; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    const double d = wp[grid.index(i, j + 1)] - wp[grid.index(i, j)];
                    sum += cy * d * d;
                }
        }
        return sum;
    };

    double budget = 0.0;
    double prev = d1_of(traj.states.front());
    for (std::size_t n = 1; n < traj.states.size(); ++n) {
        const double cur = d1_of(traj.states[n]);
        budget += 0.5 * (traj.states[n].t - traj.states[n - 1].t) * (prev + cur);
        prev = cur;
    }
    return budget;
}

double h1_trajectory_distance(const Trajectory& a, const Trajectory& b, double exponent) {
    if (a.states.size() != b.states.size())
        throw std::invalid_argument("h1_trajectory_distance: trajectories differ in length");
    if (a.states.empty()) return 0.0;
    const Grid& grid = a.grid;
    const double vol = grid.cell_volume();

    auto h1_sq = [&](const State& sa, const State& sb) {
        Field d(grid);
        for (int k = 0; k < grid.cells(); ++k)
            d[k] = std::pow(std::max(sa.w[k], 0.0), exponent) -
                   std::pow(std::max(sb.w[k], 0.0), exponent);
        double value = 0.0;
        for (int k = 0; k < grid.cells(); ++k) value += d[k] * d[k];
        value *= vol;
        const double cx = grid.dim == 1 ? 1.0 / grid.hx : grid.hy / grid.hx;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx - 1; ++i) {
                const double g = d[grid.index(i + 1, j)] - d[grid.index(i, j)];
                value += cx * g * g;
            }
        if (grid.dim == 2) {
            const double cy = grid.hx / grid.hy;
            for (int j = 0; j < grid.ny - 1; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    const double g = d[grid.index(i, j + 1)] - d[grid.index(i, j)];
                    value += cy * g * g;
                }
        }
        return value;
    };

    double acc = 0.0;
    double prev = h1_sq(a.states.front(), b.states.front());
    for (std::size_t n = 1; n < a.states.size(); ++n) {
        const double tA = a.states[n].t, tB = b.states[n].t;
        if (std::fabs(tA - tB) > 1e-12 * std::max(1.0, std::fabs(tA)))
            throw std::invalid_argument("h1_trajectory_distance: time levels differ");
        const double cur = h1_sq(a.states[n], b.states[n]);
        acc += 0.5 * (tA - a.states[n - 1].t) * (prev + cur);
        prev = cur;
    }
    return std::sqrt(acc);
}

}  // namespace crossdiff
