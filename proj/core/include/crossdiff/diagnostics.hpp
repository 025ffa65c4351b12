#pragma once

#include <iosfwd>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/scheme.hpp"

namespace crossdiff {

/// Per-step scalar functionals mirroring the a priori estimates.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass_w = 0.0, mass_u1 = 0.0, mass_u2 = 0.0;
    double min_u1 = 0.0, max_u1 = 0.0;
    double min_u2 = 0.0, max_u2 = 0.0;
    double min_w = 0.0, max_w = 0.0;
    double identity_residual = 0.0;   // max|w - u1 - u2|
    double l2_w = 0.0;                // (1/2) int w^2
    double d1 = 0.0;                  // int |grad w^{(gamma+1)/2}|^2
    double d2 = 0.0;                  // int (mu u1 + nu u2) w^{gamma-1} |grad w|^2
    double overlap = 0.0;             // int u1 u2, negative parts clamped at 0
    double eta1_min = 0.0, eta1_max = 0.0;   // volume-fraction range over
    double eta2_min = 0.0, eta2_max = 0.0;   // cells with w above the floor
};

/// Gradient integrals use face differences (consistent with the flux
/// operators); d2 uses the FaceMobility of the state itself. Volume fractions
/// eta_i = u_i / w are taken over cells with w > max(10*epsilon_floor, 1e-13)
/// and are 0/0-free by that guard.
DiagnosticsRecord record_diagnostics(const State& state, const Params& params,
                                     const Grid& grid);

/// Fixed CSV schema; header first, then one row per record, %.17g floats.
void write_diagnostics_header(std::ostream& os);
void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r);

/// A completed run: every accepted state, initial state first. Owns a copy
/// of the (small, value-type) grid so it stays self-contained.
struct Trajectory {
    Grid grid;
    std::vector<State> states;

    double t_begin() const { return states.front().t; }
    double t_end() const { return states.back().t; }
};

/// Records every accepted step into traj (call before run(); initial state
/// must be pushed by the caller via capture_initial).
RunHooks capture_trajectory(Trajectory& traj);

/// Residuals of the weak-form identity against Neumann-compatible tensor
/// cosine test functions cos(kx pi (x-x0)/Lx) * cos(ky pi (y-y0)/Ly),
/// 0 <= k <= max_mode (k = 0 rows reduce to the mass balance). Time
/// integration is the right-endpoint rectangle rule matching the scheme.
struct WeakResidualRow {
    int species = 1;
    int kx = 0, ky = 0;
    double residual = 0.0;
};

std::vector<WeakResidualRow> weak_residual(const Trajectory& traj, int max_mode,
                                           const Params& params, const GrowthModel& model,
                                           const Grid& grid);

/// Trapezoid time integral of d1 = int |grad w^{(gamma+1)/2}|^2 over the run.
double dissipation_budget(const Trajectory& traj, double gamma);

/// Discrete L2(0,T;H1)-type distance between the w^exponent fields of two
/// trajectories on the same grid and time levels: value + face-gradient
/// quadrature under a trapezoid rule in time. Symmetric, zero for identical
/// trajectories.
double h1_trajectory_distance(const Trajectory& a, const Trajectory& b, double exponent);

}  // namespace crossdiff
