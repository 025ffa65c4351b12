#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

/// Simulation state: species densities, their sum, and the current time.
struct State {
    Field u1, u2, w;
    double t = 0.0;

    State() = default;
    State(const Grid& g, double time = 0.0) : u1(g), u2(g), w(g), t(time) {}
};

/// Recompute w := u1 + u2 cell by cell (used when building initial states).
void sync_w(State& s);

struct StepStats {
    int linear_iterations = 0;
    double worst_linear_residual = 0.0;
};

/// One linearized w-solve of the fixed-point map: backward Euler for
///   (w - w_prev)/dt = gamma div[(mu th(v1) + nu th(v2)) (th(v1)+th(v2))^{gamma-1} grad w]
///                     + eps lap w + th(v1) F(th(omega)) + th(v2) G(th(omega))
/// with th = theta_p and all coefficients frozen at the iterate. SPD solve.
Field w_step(const State& prev, const Field& omega, const Field& v1, const Field& v2,
             double dt, const Params& params, const GrowthModel& model, const Grid& grid,
             StepStats* stats = nullptr);

/// Species solve with the w from the same sweep: implicit eps-diffusion,
/// explicit transport through the frozen face mobility of species i, reaction
/// source frozen at the iterate. species is 1 or 2.
Field species_step(const Field& u_prev, const Field& w_new, const Field& omega,
                   const Field& v1, const Field& v2, double dt, const Params& params,
                   const GrowthModel& model, const Grid& grid, int species,
                   StepStats* stats = nullptr);

struct StepReport {
    bool converged = false;
    int picard_iterations = 0;
    double picard_residual = 0.0;
    std::vector<double> residual_history;
    int linear_iterations = 0;           // summed over all solves of the step
    double worst_linear_residual = 0.0;
    double identity_residual = 0.0;      // max|w - u1 - u2| after the step
    double min_u1_preclip = 0.0;
    double min_u2_preclip = 0.0;
    int clipped_cells = 0;               // u_i below -10*linear_tol zeroed
    bool clipped() const { return clipped_cells > 0; }
};

/// One time step of the fixed-point iteration: sweep w then species 1 then
/// species 2, starting from the previous time level, until the max-norm
/// change is <= picard_tol or max_picard sweeps were spent. On convergence
/// floors w at epsilon_floor() and clips species negativity below
/// -10*linear_tol (flagged). On failure the report carries the residual
/// history and the returned state is the previous one.
std::pair<State, StepReport> picard_advance(const State& prev, double dt,
                                            const Params& params, const GrowthModel& model,
                                            const Grid& grid);

struct DtPolicy {
    double dt = 1e-2;
    int max_halvings = 5;   // per-step retry budget on Picard failure
};

struct RunHooks {
    /// Called after every accepted step (step index starts at 1).
    std::function<void(int, const State&, const StepReport&)> on_step;
};

struct RunResult {
    bool ok = false;
    std::string error;
    State final_state;
    int steps = 0;
    double t_reached = 0.0;
    int clipped_steps = 0;
    int total_picard_iterations = 0;
    int halvings_used = 0;   // total across the run
};

/// Advance to t_end with fixed dt (last step shortened to land exactly),
/// halving dt for a failing step up to max_halvings before giving up.
/// Rejects (H3)-violating initial data (negative species or w0 > w_p) before
/// stepping; with lift_initial set, adds epsilon to u1 first and requires the
/// lifted w0 to stay below w_p. Deterministic given its inputs.
RunResult run(const State& initial, double t_end, const DtPolicy& policy,
              const Params& params, const GrowthModel& model, const Grid& grid,
              const RunHooks& hooks = {});

}  // namespace crossdiff
