#include "crossdiff/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "crossdiff/linear.hpp"

namespace crossdiff {

void sync_w(State& s) {
    for (std::size_t k = 0; k < s.w.v.size(); ++k) s.w.v[k] = s.u1.v[k] + s.u2.v[k];
}

namespace {

struct FrozenCoefficients {
    Field th_omega, th_v1, th_v2, th_sum;
    FaceMobility mobility;
    Field r1, r2, r_sum;   // reaction sources at the iterate; r_sum = r1 + r2
};

FrozenCoefficients freeze(const Field& omega, const Field& v1, const Field& v2,
                          const Params& params, const GrowthModel& model, const Grid& grid) {
    FrozenCoefficients fc{Field(grid), Field(grid), Field(grid), Field(grid),
                          {},          Field(grid), Field(grid), Field(grid)};
    const double w_p = model.w_p;
    for (int k = 0; k < grid.cells(); ++k) {
        fc.th_omega[k] = theta_p(omega[k], w_p);
        fc.th_v1[k] = theta_p(v1[k], w_p);
        fc.th_v2[k] = theta_p(v2[k], w_p);
        fc.th_sum[k] = fc.th_v1[k] + fc.th_v2[k];
        const auto [r1, r2] = reaction_rates(fc.th_v1[k], fc.th_v2[k], fc.th_omega[k], model);
        fc.r1[k] = r1;
        fc.r2[k] = r2;
        fc.r_sum[k] = r1 + r2;   // the w-equation source, grouped so the
                                 // species sources add to it bit-exactly
    }
    fc.mobility = face_mobilities(fc.th_v1, fc.th_v2, fc.th_sum, params.mu, params.nu,
                                  params.gamma, grid);
    return fc;
}

void scale_faces(FaceField& f, double s) {
    for (double& c : f.x) c *= s;
    for (double& c : f.y) c *= s;
}

SolveResult run_solve(const LinearSystem& sys, Field& x, const Params& params,
                      StepStats* stats) {
    // drive the solves two decades below the contract tolerance: the
    // w = u1 + u2 identity accumulates the three solver residuals over the
    // run, and the slack keeps it within 10*linear_tol on long 2D runs;
    // a rounding-floor exit that still meets the contract counts as solved
    SolveResult res = solve_spd(sys, x, 0.01 * params.linear_tol);
    if (!res.converged && res.residual <= params.linear_tol) res.converged = true;
    if (stats) {
        stats->linear_iterations += res.iterations;
        stats->worst_linear_residual = std::max(stats->worst_linear_residual, res.residual);
    }
    return res;
}

}  // namespace

Field w_step(const State& prev, const Field& omega, const Field& v1, const Field& v2,
             double dt, const Params& params, const GrowthModel& model, const Grid& grid,
             StepStats* stats) {
    if (!(dt > 0.0)) throw std::invalid_argument("w_step: dt must be positive");

    const FrozenCoefficients fc = freeze(omega, v1, v2, params, model, grid);

    FaceField transport = fc.mobility.combined;
    scale_faces(transport, params.gamma);

    LinearSystem sys = make_backward_euler_system(grid, 1.0 / dt, &transport, params.epsilon);
    for (int k = 0; k < grid.cells(); ++k) sys.rhs[k] = prev.w[k] / dt + fc.r_sum[k];

    Field w = omega;   // warm start from the iterate
    const SolveResult res = run_solve(sys, w, params, stats);
    if (!res.converged)
        throw std::runtime_error("w_step: linear solver failed (relative residual " +
                                 std::to_string(res.residual) + ")");
    return w;
}

Field species_step(const Field& u_prev, const Field& w_new, const Field& omega,
                   const Field& v1, const Field& v2, double dt, const Params& params,
                   const GrowthModel& model, const Grid& grid, int species,
                   StepStats* stats) {
    if (!(dt > 0.0)) throw std::invalid_argument("species_step: dt must be positive");
    if (species != 1 && species != 2)
        throw std::invalid_argument("species_step: species must be 1 or 2");

    const FrozenCoefficients fc = freeze(omega, v1, v2, params, model, grid);
    const FaceField& mob = species == 1 ? fc.mobility.species1 : fc.mobility.species2;
    const Field& reaction = species == 1 ? fc.r1 : fc.r2;
    const double mobility = species == 1 ? params.mu : params.nu;

    // transport with the w of this sweep, explicit; gamma = 1 keeps the flux
    // linear in w_new so the species equations sum to the w-equation
    const Field transport = div_flux(mob, w_new, 1.0, grid);

    LinearSystem sys = make_backward_euler_system(grid, 1.0 / dt, nullptr, params.epsilon);
    const double gm = params.gamma * mobility;
    for (int k = 0; k < grid.cells(); ++k)
        sys.rhs[k] = u_prev[k] / dt + gm * transport[k] + reaction[k];

    Field u = species == 1 ? v1 : v2;
    const SolveResult res = run_solve(sys, u, params, stats);
    if (!res.converged)
        throw std::runtime_error("species_step: linear solver failed (relative residual " +
                                 std::to_string(res.residual) + ")");
    return u;
}

std::pair<State, StepReport> picard_advance(const State& prev, double dt,
                                            const Params& params, const GrowthModel& model,
                                            const Grid& grid) {
    StepReport report;
    StepStats stats;

    Field omega = prev.w;
    Field v1 = prev.u1;
    Field v2 = prev.u2;

    bool converged = false;
    try {
        for (int it = 0; it < params.max_picard; ++it) {
            Field w_new = w_step(prev, omega, v1, v2, dt, params, model, grid, &stats);
            Field u1_new =
                species_step(prev.u1, w_new, omega, v1, v2, dt, params, model, grid, 1, &stats);
            Field u2_new =
                species_step(prev.u2, w_new, omega, v1, v2, dt, params, model, grid, 2, &stats);

            const double res = std::max({max_norm_diff(w_new, omega), max_norm_diff(u1_new, v1),
                                         max_norm_diff(u2_new, v2)});
            omega = std::move(w_new);
            v1 = std::move(u1_new);
            v2 = std::move(u2_new);

            report.residual_history.push_back(res);
            report.picard_iterations = it + 1;
            report.picard_residual = res;
            if (res <= params.picard_tol) {
                converged = true;
                break;
            }
        }
    } catch (const std::runtime_error&) {
        // linear solver gave up; surface as a step failure so the caller can
        // retry with a smaller dt
        converged = false;
    }

    report.linear_iterations = stats.linear_iterations;
    report.worst_linear_residual = stats.worst_linear_residual;
    report.converged = converged;
    if (!converged) return {prev, report};

    State next(grid, prev.t + dt);
    next.w = std::move(omega);
    next.u1 = std::move(v1);
    next.u2 = std::move(v2);

    report.min_u1_preclip = field_min(next.u1);
    report.min_u2_preclip = field_min(next.u2);

    const double clip_below = -10.0 * params.linear_tol;
    for (int k = 0; k < grid.cells(); ++k) {
        if (next.u1[k] < clip_below) {
            next.u1[k] = 0.0;
            ++report.clipped_cells;
        }
        if (next.u2[k] < clip_below) {
            next.u2[k] = 0.0;
            ++report.clipped_cells;
        }
    }

    // floor w at the active epsilon floor (0 when the initial data was not
    // lifted); with lifted data this only clips solver noise, keeping the
    // w = u1 + u2 identity intact
    const double floor = params.epsilon_floor();
    for (int k = 0; k < grid.cells(); ++k) next.w[k] = std::max(next.w[k], floor);

    double idres = 0.0;
    for (int k = 0; k < grid.cells(); ++k)
        idres = std::max(idres, std::fabs(next.w[k] - next.u1[k] - next.u2[k]));
    report.identity_residual = idres;

    return {std::move(next), report};
}

RunResult run(const State& initial, double t_end, const DtPolicy& policy,
              const Params& params, const GrowthModel& model, const Grid& grid,
              const RunHooks& hooks) {
    RunResult out;
    if (!(t_end >= initial.t)) {
        out.error = "run: t_end precedes the initial time";
        return out;
    }
    if (!(policy.dt > 0.0)) {
        out.error = "run: dt must be positive";
        return out;
    }

    // (H3): nonnegative species, total density below the threshold
    if (field_min(initial.u1) < 0.0 || field_min(initial.u2) < 0.0) {
        out.error = "run: (H3) violated, negative initial species density";
        return out;
    }
    const double w0max = field_max(initial.w);
    const double h3_slack = 1e-12 * model.w_p;
    if (w0max > model.w_p + h3_slack) {
        std::ostringstream os;
        os << "run: (H3) violated, initial w exceeds w_p (max w0 = " << w0max
           << ", w_p = " << model.w_p << ")";
        out.error = os.str();
        return out;
    }

    State state = initial;
    if (params.lift_initial) {
        if (w0max + params.epsilon > model.w_p + h3_slack) {
            out.error = "run: lift_initial needs headroom max(w0) + epsilon <= w_p";
            return out;
        }
        for (int k = 0; k < grid.cells(); ++k) {
            state.u1[k] += params.epsilon;
            state.w[k] += params.epsilon;
        }
    }

    const double t_tol = 1e-12 * std::max(1.0, std::fabs(t_end));
    int step = 0;
    while (state.t < t_end - t_tol) {
        const double dt_base = std::min(policy.dt, t_end - state.t);
        double dt = dt_base;
        bool accepted = false;
        StepReport report;
        State next;
        for (int attempt = 0; attempt <= policy.max_halvings; ++attempt) {
            dt = std::ldexp(dt_base, -attempt);
            std::tie(next, report) = picard_advance(state, dt, params, model, grid);
            if (report.converged) {
                accepted = true;
                out.halvings_used += attempt;
                break;
            }
        }
        if (!accepted) {
            out.halvings_used += policy.max_halvings;
            std::ostringstream os;
            os << "run: Picard iteration failed at t = " << state.t << " (dt = " << dt
               << ", last residual = " << report.picard_residual << ")";
            out.error = os.str();
            out.t_reached = state.t;
            out.final_state = std::move(state);
            out.steps = step;
            return out;
        }

        state = std::move(next);
        ++step;
        out.total_picard_iterations += report.picard_iterations;
        if (report.clipped()) ++out.clipped_steps;
        if (hooks.on_step) hooks.on_step(step, state, report);
    }

    out.ok = true;
    out.steps = step;
    out.t_reached = state.t;
    out.final_state = std::move(state);
    return out;
}

}  // namespace crossdiff
