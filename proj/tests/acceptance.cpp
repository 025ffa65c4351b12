// Acceptance suite: one criterion per section, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <future>
#include <string>
#include <vector>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/experiments.hpp"
#include "crossdiff/scheme.hpp"
#include "test_util.hpp"

using namespace crossdiff;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] C%-2d %s  (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    g_results.push_back({id, name, pass, detail});
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// test matrix shared by criteria 1, 2 and 8: 1D and 2D, gamma in {1.5, 2, 3},
// mobility ratio mu/nu in {1, 2}, smooth bump data, T = 1
// ---------------------------------------------------------------------------

struct MatrixCase {
    int dim;
    double gamma;
    double ratio;
};

struct MatrixOutcome {
    MatrixCase c;
    bool ok = false;
    std::string error;
    double worst_max_w = 0.0;
    double worst_min_u = 0.0;
    double worst_identity = 0.0;
    double worst_gronwall_excess = -1e300;
};

// one compactly supported bump split 60/40 between the species: degenerate
// vacuum plus a front shared by both species, so the arithmetic face
// averages never extract mass from an empty donor cell (interpenetrating
// species fronts are outside the scheme's noise-level-nonnegativity regime)
State matrix_initial_state(const Grid& g) {
    State s(g);
    for (int k = 0; k < g.cells(); ++k) {
        const auto c = g.center(k);
        const double y = g.dim == 2 ? c[1] : 0.5;
        const double dx = c[0] - 0.5, dy = y - 0.5;
        const double r = std::sqrt(dx * dx + dy * dy) / 0.3;
        const double cs = r >= 1.0 ? 0.0 : std::cos(1.5707963267948966 * r);
        const double b = 0.75 * cs * cs;
        s.u1[k] = 0.6 * b;
        s.u2[k] = 0.4 * b;
    }
    sync_w(s);
    return s;
}

MatrixOutcome run_matrix_case(const MatrixCase& c) {
    MatrixOutcome out;
    out.c = c;

    const Grid g = c.dim == 1 ? make_grid(1, {64}, {1.0}) : make_grid(2, {64, 64}, {1.0, 1.0});
    Params p;
    p.gamma = c.gamma;
    p.mu = c.ratio;
    p.nu = 1.0;
    p.epsilon = 1e-4;
    const GrowthModel model = logistic_model(0.5, 1.0);
    const double M0 = reaction_bound(model, 10001).M0;
    const State init = matrix_initial_state(g);
    const double l2_0 = record_diagnostics(init, p, g).l2_w;

    out.worst_min_u = 1e300;
    RunHooks hooks;
    hooks.on_step = [&](int, const State& s, const StepReport& rep) {
        out.worst_max_w = std::max(out.worst_max_w, field_max(s.w));
        out.worst_min_u = std::min({out.worst_min_u, rep.min_u1_preclip, rep.min_u2_preclip});
        out.worst_identity = std::max(out.worst_identity, rep.identity_residual);
        double l2 = 0.0;
        for (int k = 0; k < g.cells(); ++k) l2 += s.w[k] * s.w[k];
        l2 *= 0.5 * g.cell_volume();
        const double bound = l2_0 * std::exp(2.0 * M0 * s.t) + 1e-6;
        out.worst_gronwall_excess = std::max(out.worst_gronwall_excess, l2 - bound);
    };

    DtPolicy dtp;
    dtp.dt = c.dim == 1 ? 2e-3 : 4e-3;
    const RunResult rr = run(init, 1.0, dtp, p, model, g, hooks);
    out.ok = rr.ok;
    out.error = rr.error;
    return out;
}

std::string case_tag(const MatrixCase& c) {
    return fmt("%dD g=%.1f mu/nu=%.0f", c.dim, c.gamma, c.ratio);
}

// criteria 1, 2, 8 evaluated over the shared matrix outcomes
void criteria_matrix() {
    std::vector<MatrixCase> cases;
    for (int dim : {1, 2})
        for (double gamma : {1.5, 2.0, 3.0})
            for (double ratio : {1.0, 2.0}) cases.push_back({dim, gamma, ratio});

    std::vector<MatrixOutcome> outcomes(cases.size());
    const std::size_t workers = 4;
    for (std::size_t begin = 0; begin < cases.size(); begin += workers) {
        std::vector<std::future<void>> batch;
        for (std::size_t i = begin; i < std::min(cases.size(), begin + workers); ++i)
            batch.push_back(std::async(std::launch::async, [&cases, &outcomes, i] {
                outcomes[i] = run_matrix_case(cases[i]);
            }));
        for (auto& f : batch) f.get();
    }

    bool all_ok = true;
    std::string fail_note;
    for (const auto& o : outcomes)
        if (!o.ok) {
            all_ok = false;
            fail_note = case_tag(o.c) + ": " + o.error;
            break;
        }

    {
        double worst = -1e300;
        std::string where;
        for (const auto& o : outcomes)
            if (o.worst_max_w - 1.0 > worst) {
                worst = o.worst_max_w - 1.0;
                where = case_tag(o.c);
            }
        const bool pass = all_ok && worst <= 1e-8;
        report(1, "max principle: max(w) <= w_p + 1e-8 across the matrix", pass,
               all_ok ? fmt("worst excess %.3e [%s]", worst, where.c_str()) : fail_note);
    }
    {
        double worst_u = 1e300, worst_id = 0.0;
        std::string wu, wi;
        for (const auto& o : outcomes) {
            if (o.worst_min_u < worst_u) {
                worst_u = o.worst_min_u;
                wu = case_tag(o.c);
            }
            if (o.worst_identity > worst_id) {
                worst_id = o.worst_identity;
                wi = case_tag(o.c);
            }
        }
        const bool pass = all_ok && worst_u >= -1e-10 && worst_id <= 1e-10;
        report(2, "nonnegativity and identity: min(u_i) >= -1e-10, |w-u1-u2| <= 1e-10", pass,
               all_ok ? fmt("min u %.3e [%s], identity %.3e [%s]", worst_u, wu.c_str(),
                            worst_id, wi.c_str())
                      : fail_note);
    }
    {
        double worst = -1e300;
        for (const auto& o : outcomes) worst = std::max(worst, o.worst_gronwall_excess);
        const bool pass = all_ok && worst <= 0.0;
        report(8, "L2 Gronwall mirror: l2(t) <= l2(0) exp(2 M0 t) + 1e-6", pass,
               all_ok ? fmt("worst excess %.3e", worst) : fail_note);
    }
}

// ---------------------------------------------------------------------------
// criterion 3: mass balance
// ---------------------------------------------------------------------------

void criterion_mass_balance() {
    bool pass = true;
    std::string detail;

    // zero rates: 1e3 steps, relative drift of the w cell-sum
    for (int dim : {1, 2}) {
        const Grid g = dim == 1 ? make_grid(1, {64}, {1.0}) : make_grid(2, {32, 32}, {1., 1.});
        Params p;
        p.gamma = 2.0;
        p.epsilon = 1e-4;
        const GrowthModel model = zero_model(1.0);
        const State init = matrix_initial_state(g);
        const double m0 = cell_sum(init.w, g);

        double worst_rel = 0.0;
        RunHooks hooks;
        hooks.on_step = [&](int, const State& s, const StepReport&) {
            worst_rel = std::max(worst_rel, std::fabs(cell_sum(s.w, g) - m0) / m0);
        };
        const RunResult rr = run(init, 1.0, DtPolicy{1e-3, 5}, p, model, g, hooks);
        if (!rr.ok || rr.steps != 1000) {
            pass = false;
            detail += fmt("%dD run failed; ", dim);
            continue;
        }
        if (worst_rel > 1e-10) pass = false;
        detail += fmt("%dD drift %.3e; ", dim, worst_rel);
    }

    // rates on: per-step mass change against the reaction integral
    {
        const Grid g = make_grid(1, {64}, {1.0});
        Params p;
        p.gamma = 2.0;
        p.epsilon = 1e-4;
        const GrowthModel model = logistic_model(0.5, 1.0);
        const State init = matrix_initial_state(g);

        double worst_rel = 0.0;
        double prev_mass = cell_sum(init.w, g);
        RunHooks hooks;
        hooks.on_step = [&](int, const State& s, const StepReport&) {
            double r_sum = 0.0;
            for (int k = 0; k < g.cells(); ++k) {
                const auto [r1, r2] =
                    reaction_rates(theta_p(s.u1[k], model.w_p), theta_p(s.u2[k], model.w_p),
                                   theta_p(s.w[k], model.w_p), model);
                r_sum += r1 + r2;
            }
            const double dt = 1e-3;
            const double r_int = dt * r_sum * g.cell_volume();
            const double mass = cell_sum(s.w, g);
            const double denom = std::max(std::fabs(r_int), 1e-10 * mass);
            worst_rel = std::max(worst_rel, std::fabs(mass - prev_mass - r_int) / denom);
            prev_mass = mass;
        };
        const RunResult rr = run(init, 1.0, DtPolicy{1e-3, 5}, p, model, g, hooks);
        if (!rr.ok) pass = false;
        if (worst_rel > 1e-8) pass = false;
        detail += fmt("reaction match %.3e", worst_rel);
    }

    report(3, "mass balance: drift <= 1e-10 rel over 1e3 steps; step change = R dt to 1e-8",
           pass, detail);
}

// ---------------------------------------------------------------------------
// criterion 4: Barenblatt validation of the limit equation
// ---------------------------------------------------------------------------

void criterion_barenblatt() {
    PmeScenario sc;   // gamma 2, mu 1, mass 1, t0 1, L 5, T 0.5, eta 1, dt0 2e-3 at n=128
    const StudyReport rep = pme_validation({128, 256, 512, 1024}, sc, 4);
    std::string orders;
    for (double o : rep.orders) orders += fmt("%.2f ", o);
    report(4, "Barenblatt limit: L1 order >= 0.8 and final error <= 2%", rep.pass,
           fmt("ls order %.3f, per-pair [%s], final rel err %.4f%%", rep.observed_order,
               orders.c_str(), 100.0 * rep.errors.back()));
}

// ---------------------------------------------------------------------------
// criterion 5: split invariance of the w trajectory
// ---------------------------------------------------------------------------

void criterion_split_invariance() {
    PmeScenario sc;
    const int cells = 256;
    const double eps = sc.domain_length / cells;

    PmeScenario sc_eta = sc;
    sc_eta.eta = 0.3;
    const EpsilonSweep a = run_epsilon_sweep(sc, sc.mu, sc.mu, {eps}, cells, 1);
    const EpsilonSweep b = run_epsilon_sweep(sc_eta, sc.mu, sc.mu, {eps}, cells, 1);

    bool pass = a.all_ok && b.all_ok;
    double worst = 0.0;
    std::size_t states = 0;
    if (pass) {
        const auto& sa = a.levels[0].trajectory.states;
        const auto& sb = b.levels[0].trajectory.states;
        states = sa.size();
        pass = sa.size() == sb.size();
        if (pass)
            for (std::size_t n = 0; n < sa.size(); ++n)
                worst = std::max(worst, max_norm_diff(sa[n].w, sb[n].w));
        pass = pass && worst <= 1e-9;
    }
    report(5, "split invariance: eta=0.3 w-trajectory matches eta=1 to 1e-9", pass,
           fmt("max |w_a - w_b| = %.3e over %zu states", worst, states));
}

// ---------------------------------------------------------------------------
// criteria 6 and 7: epsilon sweep (Cauchy distances, dissipation budgets)
// ---------------------------------------------------------------------------

void criteria_epsilon_sweep() {
    PmeScenario sc;
    const std::vector<double> levels{1e-1, 1e-2, 1e-3, 1e-4};
    const EpsilonSweep sweep = run_epsilon_sweep(sc, sc.mu, sc.mu, levels, 128, 4);

    {
        bool pass = sweep.all_ok && sweep.distances.size() == 3;
        std::string ds;
        for (std::size_t i = 0; i < sweep.distances.size(); ++i) {
            ds += fmt("%.4e ", sweep.distances[i]);
            if (i > 0 && !(sweep.distances[i] < sweep.distances[i - 1])) pass = false;
        }
        report(6, "epsilon-Cauchy: consecutive H1 distances of w^{gamma+1} strictly decrease",
               pass, "distances " + ds);
    }
    {
        bool pass = sweep.all_ok;
        double bmin = 1e300, bmax = 0.0;
        std::string bs;
        std::vector<double> budgets;
        for (const auto& lvl : sweep.levels) {
            budgets.push_back(lvl.dissipation_budget);
            bmin = std::min(bmin, lvl.dissipation_budget);
            bmax = std::max(bmax, lvl.dissipation_budget);
            bs += fmt("%.5f ", lvl.dissipation_budget);
        }
        pass = pass && bmax < 2.0 * bmin;
        // bounded trend: consecutive increments shrink in magnitude
        for (std::size_t i = 2; i < budgets.size(); ++i)
            if (std::fabs(budgets[i] - budgets[i - 1]) >
                std::fabs(budgets[i - 1] - budgets[i - 2]) * (1.0 + 1e-9))
                pass = false;
        report(7, "dissipation budgets: within a factor 2, increments shrinking", pass,
               fmt("budgets %s(ratio %.3f)", bs.c_str(), bmax / (bmin > 0 ? bmin : 1.0)));
    }
}

// ---------------------------------------------------------------------------
// criterion 9: quadratic-form oracle equivalence
// ---------------------------------------------------------------------------

void criterion_quadratic_form() {
    const testutil::QuadFormOracle oracle(10000, 99);
    testutil::Rng rng(1234);
    const int total = 100000;
    int disagreements = 0;
    int true_verdicts = 0;

    for (int i = 0; i < total; ++i) {
        double A, B, C;
        if (i % 2 == 0) {
            auto draw = [&rng](bool force_zero) {
                if (force_zero) return 0.0;
                const double mag = rng.log_uniform(-3.0, 3.0);
                return rng.uniform01() < 0.5 ? mag : -mag;
            };
            A = draw(i % 10 == 0);
            B = draw(i % 14 == 0);
            C = draw(i % 22 == 0);
        } else {
            A = rng.log_uniform(-3.0, 3.0);
            C = rng.log_uniform(-3.0, 3.0);
            const double delta = rng.uniform(-1e-10, 1e-10);
            B = (rng.uniform01() < 0.5 ? 2.0 : -2.0) * std::sqrt(A * C) * (1.0 + delta);
        }
        const bool verdict = quadratic_form_nonneg(A, B, C);
        if (verdict) ++true_verdicts;
        if (oracle.disagrees(verdict, A, B, C)) ++disagreements;
    }
    report(9, "quadratic-form criterion agrees with the sampled oracle on 1e5 triples",
           disagreements == 0,
           fmt("%d disagreements, %d/%d nonnegative verdicts", disagreements, true_verdicts,
               total));
}

// ---------------------------------------------------------------------------
// criterion 10: weak-form residual decreases under (h, dt) refinement
// ---------------------------------------------------------------------------

void criterion_weak_residual() {
    const GrowthModel model = logistic_model(0.5, 1.0);
    std::vector<double> residuals;
    bool all_ok = true;

    for (int n : {64, 128, 256, 512}) {
        const Grid g = make_grid(1, {n}, {1.0});
        Params p;
        p.gamma = 2.0;
        p.epsilon = 1.0 / n;
        State init(g);
        for (int k = 0; k < g.cells(); ++k) {
            const double x = g.center(k)[0];
            const double r = std::fabs(x - 0.5) / 0.2;
            const double cs = r >= 1.0 ? 0.0 : std::cos(1.5707963267948966 * r);
            init.u1[k] = 0.6 * 0.5 * cs * cs;
            init.u2[k] = 0.4 * 0.5 * cs * cs;
        }
        sync_w(init);

        Trajectory traj;
        traj.grid = g;
        traj.states.push_back(init);
        RunHooks hooks = capture_trajectory(traj);
        const RunResult rr = run(init, 0.5, DtPolicy{4e-3 * 64.0 / n, 5}, p, model, g, hooks);
        if (!rr.ok) {
            all_ok = false;
            break;
        }
        double worst = 0.0;
        for (const auto& row : weak_residual(traj, 3, p, model, g))
            worst = std::max(worst, row.residual);
        residuals.push_back(worst);
    }

    bool pass = all_ok && residuals.size() == 4;
    std::string rs;
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        rs += fmt("%.4e ", residuals[i]);
        if (i > 0 && !(residuals[i] < residuals[i - 1])) pass = false;
    }
    report(10, "weak-form residuals decrease monotonically over three (h,dt) halvings", pass,
           "max residuals " + rs);
}

// ---------------------------------------------------------------------------
// criterion 11: segregation
// ---------------------------------------------------------------------------

void criterion_segregation() {
    const Grid g = make_grid(1, {256}, {2.0});
    SegregationScenario sc;
    sc.bump1 = BumpSpec{0.5, 0.2, {0.5, 0.0}};
    sc.bump2 = BumpSpec{0.5, 0.2, {1.5, 0.0}};
    sc.epsilon = 1e-4;
    sc.t_end = 0.5;
    sc.dt = 1e-3;

    const StudyReport disjoint = segregation_study(sc, g);

    SegregationScenario control = sc;
    control.bump2.center[0] = 0.85;
    const StudyReport overlapping = segregation_study(control, g, false);

    const bool pass = disjoint.pass && !overlapping.pass &&
                      overlapping.errors.front() > sc.overlap_threshold;
    report(11, "segregation: disjoint bumps stay below 1e-6 rel overlap; control exceeds it",
           pass,
           fmt("disjoint max %.3e, control at t=0 %.3e",
               disjoint.metrics.at("max_relative_overlap"), overlapping.errors.front()));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();

    criteria_matrix();
    criterion_mass_balance();
    criterion_barenblatt();
    criterion_split_invariance();
    criteria_epsilon_sweep();
    criterion_quadratic_form();
    criterion_weak_residual();
    criterion_segregation();

    int failed = 0;
    for (const auto& c : g_results)
        if (!c.pass) ++failed;

    const double secs = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count() /
                        1e3;
    std::printf("-----\n%zu criteria, %d failed (%.1f s)\n", g_results.size(), failed, secs);
    return failed;
}
