#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

/// Self-similar source solution of the porous medium equation
/// dv/dt = c lap(v^m): compactly supported, nonnegative, mass-preserving.
struct BarenblattParams {
    double m = 3.0;      // PME exponent, = gamma + 1 when derived from the scheme
    double c = 1.0;      // diffusivity scale, = mu*gamma/(gamma+1)
    double mass = 1.0;
    double t0 = 1.0;     // time offset; profiles evaluated at t + t0 > 0
    int dim = 1;
};

/// Validates m > 1, c > 0, mass > 0, t0 > 0, dim in {1,2}.
BarenblattParams make_barenblatt(double gamma, double mu, double mass, double t0, int dim);

double barenblatt(const std::array<double, 2>& x, double t, const BarenblattParams& p);
/// Analytic time derivative (used by the PME residual check; diverges at the
/// support edge, evaluate strictly inside).
double barenblatt_dt(const std::array<double, 2>& x, double t, const BarenblattParams& p);
double barenblatt_support_radius(double t, const BarenblattParams& p);

/// Outcome of a scripted study: per-level numbers plus pass/fail.
struct StudyReport {
    std::string study;
    bool pass = false;
    std::vector<double> levels;     // h, epsilon, or time, depending on study
    std::vector<double> errors;     // per level (or per consecutive pair)
    std::vector<double> orders;     // per adjacent level pair, when meaningful
    double observed_order = 0.0;    // least-squares slope of log e vs log h
    std::map<std::string, double> metrics;
    std::vector<std::string> notes;
};

/// Barenblatt scenario shared by the convergence and epsilon studies:
/// box [-L/2, L/2]^d, zero rates, initial data = oracle profile at t0 split
/// as u1 = eta*w0, u2 = (1-eta)*w0.
struct PmeScenario {
    double gamma = 2.0;
    double mu = 1.0;            // nu = mu for the PME limit
    double mass = 1.0;
    double t0 = 1.0;
    double domain_length = 5.0;
    double t_end = 0.5;
    double eta = 1.0;
    double w_p = 1.0;
    int dim = 1;
    int base_cells = 128;       // dt0 refers to this resolution
    double dt0 = 2e-3;          // scaled as dt0 * base_cells / n per level
};

/// Centered box [-L/2, L/2]^dim with the given cells per axis.
Grid scenario_grid(const PmeScenario& sc, int cells);

/// Oracle profile at t0 sampled at cell centers, split eta / (1 - eta).
State barenblatt_initial_state(const PmeScenario& sc, const Grid& grid);

/// L1 error of the simulated total density against the analytic profile at
/// t_end, one grid level per entry of cells_per_level, with epsilon tied to h.
/// Pass: least-squares observed order >= 0.8 and final relative L1 error <= 2%.
StudyReport pme_validation(const std::vector<int>& cells_per_level, const PmeScenario& sc,
                           int workers = 1);

/// One level of an epsilon sweep on a fixed grid.
struct SweepLevel {
    double epsilon = 0.0;
    bool ok = false;
    std::string error;
    double dissipation_budget = 0.0;
    double max_w = 0.0;
    double min_u_preclip = 0.0;
    double max_identity_residual = 0.0;
    Trajectory trajectory;
};

struct EpsilonSweep {
    std::vector<SweepLevel> levels;
    /// H1-type distances of w^{gamma+1} between consecutive levels.
    std::vector<double> distances;
    bool all_ok = true;
};

/// Shared engine: run the scenario once per epsilon on a fixed grid and
/// measure consecutive-level distances. mu and nu come from the arguments so
/// both the symmetric and the asymmetric studies use the same pipeline.
EpsilonSweep run_epsilon_sweep(const PmeScenario& sc, double mu, double nu,
                               const std::vector<double>& eps_levels, int cells,
                               int workers = 1);

/// Requires mu = nu and strictly decreasing eps levels. Pass: the sequence is
/// Cauchy in the sense that each consecutive distance is <= the previous one.
StudyReport epsilon_study(const PmeScenario& sc, const std::vector<double>& eps_levels,
                          int cells, int workers = 1);

/// Exploratory mu != nu sweep: same pipeline and outputs, no convergence
/// assertion; pass reflects only the per-level invariants (max principle,
/// nonnegativity, identity) and finite dissipation budgets.
StudyReport asymmetric_mobility_study(const PmeScenario& sc, double mu, double nu,
                                      const std::vector<double>& eps_levels, int cells,
                                      int workers = 1);

/// Compactly supported bump a*cos^2(pi r / (2 radius)) around center.
struct BumpSpec {
    double amplitude = 0.0;
    double radius = 0.0;
    std::array<double, 2> center = {0.0, 0.0};
};

double bump_value(const BumpSpec& b, const std::array<double, 2>& x, int dim);

struct SegregationScenario {
    BumpSpec bump1, bump2;      // initial u1 and u2
    double gamma = 2.0;
    double mu = 1.0;            // nu = mu
    double epsilon = 1e-4;
    double w_p = 1.0;
    double t_end = 0.5;
    double dt = 1e-3;
    double overlap_threshold = 1e-6;   // relative, see below
};

/// d = 1 only. Requires cell-level disjoint supports unless
/// require_disjoint = false (the overlapping control case). Tracks
/// overlap(t) = int u1 u2 and its maximum relative to mass_u1 * mass_u2;
/// an exceeded threshold is a reported finding (pass=false), not an error.
StudyReport segregation_study(const SegregationScenario& sc, const Grid& grid,
                              bool require_disjoint = true);

/// Write a study into dir: summary.json, levels.csv, and a per-level
/// diagnostics series when trajectories are supplied. No-op for empty dir.
void write_study_report(const std::string& dir, const StudyReport& report);

}  // namespace crossdiff
