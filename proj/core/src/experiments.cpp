#include "crossdiff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "crossdiff/scheme.hpp"

namespace crossdiff {

namespace {

struct SelfSimilar {
    double p;       // 1/(m-1)
    double alpha;   // d / (d(m-1) + 2)
    double beta;    // alpha / d
    double k;       // alpha (m-1) / (2 m d)
    double C;       // profile constant fixed by the mass
};

SelfSimilar derive(const BarenblattParams& bp) {
    SelfSimilar s;
    const double m = bp.m;
    const double d = bp.dim;
    s.p = 1.0 / (m - 1.0);
    s.alpha = d / (d * (m - 1.0) + 2.0);
    s.beta = s.alpha / d;
    s.k = s.alpha * (m - 1.0) / (2.0 * m * d);
    if (bp.dim == 1) {
        // mass = C^{p+1/2} k^{-1/2} * sqrt(pi) Gamma(p+1)/Gamma(p+3/2)
        const double pi = 3.14159265358979323846;
        const double shape =
            std::sqrt(pi) * std::exp(std::lgamma(s.p + 1.0) - std::lgamma(s.p + 1.5));
        s.C = std::pow(bp.mass * std::sqrt(s.k) / shape, 1.0 / (s.p + 0.5));
    } else {
        // mass = pi C^{p+1} / (k (p+1))
        const double pi = 3.14159265358979323846;
        s.C = std::pow(bp.mass * s.k * (s.p + 1.0) / pi, 1.0 / (s.p + 1.0));
    }
    return s;
}

double radius_sq(const std::array<double, 2>& x, int dim) {
    return dim == 1 ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1];
}

}  // namespace

BarenblattParams make_barenblatt(double gamma, double mu, double mass, double t0, int dim) {
    if (!(gamma > 1.0)) throw std::invalid_argument("make_barenblatt: gamma must be > 1");
    if (!(mu > 0.0)) throw std::invalid_argument("make_barenblatt: mu must be positive");
    if (!(mass > 0.0)) throw std::invalid_argument("make_barenblatt: mass must be positive");
    if (!(t0 > 0.0)) throw std::invalid_argument("make_barenblatt: t0 must be positive");
    if (dim != 1 && dim != 2) throw std::invalid_argument("make_barenblatt: dim must be 1 or 2");
    BarenblattParams bp;
    bp.m = gamma + 1.0;
    bp.c = mu * gamma / (gamma + 1.0);
    bp.mass = mass;
    bp.t0 = t0;
    bp.dim = dim;
    return bp;
}

double barenblatt(const std::array<double, 2>& x, double t, const BarenblattParams& bp) {
    if (!(t + bp.t0 > 0.0)) throw std::invalid_argument("barenblatt: need t + t0 > 0");
    const SelfSimilar s = derive(bp);
    const double tau = bp.c * (t + bp.t0);
    const double xi2 = radius_sq(x, bp.dim) * std::pow(tau, -2.0 * s.beta);
    const double g = s.C - s.k * xi2;
    if (g <= 0.0) return 0.0;
    return std::pow(tau, -s.alpha) * std::pow(g, s.p);
}

double barenblatt_dt(const std::array<double, 2>& x, double t, const BarenblattParams& bp) {
    const SelfSimilar s = derive(bp);
    const double tau = bp.c * (t + bp.t0);
    const double xi2 = radius_sq(x, bp.dim) * std::pow(tau, -2.0 * s.beta);
    const double g = s.C - s.k * xi2;
    if (g <= 0.0) return 0.0;
    // d/dtau [tau^-a g(xi)^p] with xi = |x| tau^-b:
    //   -tau^{-a-1} (a g^p + b xi g'(xi) g^{p-1} ... ) collected below
    const double gp = std::pow(g, s.p);
    const double gprime_term = -2.0 * s.p * s.k * xi2 * std::pow(g, s.p - 1.0);
    return -bp.c * std::pow(tau, -s.alpha - 1.0) * (s.alpha * gp + s.beta * gprime_term);
}

double barenblatt_support_radius(double t, const BarenblattParams& bp) {
    const SelfSimilar s = derive(bp);
    const double tau = bp.c * (t + bp.t0);
    return std::sqrt(s.C / s.k) * std::pow(tau, s.beta);
}

double bump_value(const BumpSpec& b, const std::array<double, 2>& x, int dim) {
    if (b.amplitude == 0.0 || b.radius <= 0.0) return 0.0;
    const double dx = x[0] - b.center[0];
    const double dy = dim == 2 ? x[1] - b.center[1] : 0.0;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (r >= b.radius) return 0.0;
    const double pi = 3.14159265358979323846;
    const double c = std::cos(0.5 * pi * r / b.radius);
    return b.amplitude * c * c;
}

Grid scenario_grid(const PmeScenario& sc, int cells) {
    std::vector<int> ext(static_cast<std::size_t>(sc.dim), cells);
    std::vector<double> len(static_cast<std::size_t>(sc.dim), sc.domain_length);
    std::vector<double> org(static_cast<std::size_t>(sc.dim), -0.5 * sc.domain_length);
    return make_grid(sc.dim, ext, len, org);
}

State barenblatt_initial_state(const PmeScenario& sc, const Grid& grid) {
    const BarenblattParams bp = make_barenblatt(sc.gamma, sc.mu, sc.mass, sc.t0, sc.dim);
    State s(grid);
    for (int k = 0; k < grid.cells(); ++k) {
        const double w0 = barenblatt(grid.center(k), 0.0, bp);
        s.u1[k] = sc.eta * w0;
        s.u2[k] = (1.0 - sc.eta) * w0;
        s.w[k] = s.u1[k] + s.u2[k];
    }
    return s;
}

namespace {

Params scenario_params(const PmeScenario& sc, double mu, double nu, double eps) {
    Params p;
    p.mu = mu;
    p.nu = nu;
    p.gamma = sc.gamma;
    p.epsilon = eps;
    p.lift_initial = false;   // keep the epsilon pedestal out of the comparisons
    return p;
}

double ls_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
    const std::size_t n = logx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += logx[i];
        sy += logy[i];
        sxx += logx[i] * logx[i];
        sxy += logx[i] * logy[i];
    }
    const double den = n * sxx - sx * sx;
    return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

/// Bounded fan-out over independent level indices; results land by index.
template <typename Fn>
void parallel_levels(int count, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    for (int begin = 0; begin < count; begin += workers) {
        const int end = std::min(count, begin + workers);
        std::vector<std::future<void>> batch;
        for (int i = begin; i < end; ++i)
            batch.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
        for (auto& f : batch) f.get();
    }
}

}  // namespace

StudyReport pme_validation(const std::vector<int>& cells_per_level, const PmeScenario& sc,
                           int workers) {
    if (cells_per_level.empty())
        throw std::invalid_argument("pme_validation: need at least one grid level");
    if (!(sc.eta >= 0.0 && sc.eta <= 1.0))
        throw std::invalid_argument("pme_validation: eta must lie in [0, 1]");

    StudyReport rep;
    rep.study = "pme";
    rep.levels.resize(cells_per_level.size());
    rep.errors.resize(cells_per_level.size());
    std::vector<std::string> failures(cells_per_level.size());

    const bool zero_mass = sc.mass == 0.0;
    parallel_levels(static_cast<int>(cells_per_level.size()), workers, [&](int li) {
        const int n = cells_per_level[static_cast<std::size_t>(li)];
        const Grid grid = scenario_grid(sc, n);
        const double h = grid.hx;
        rep.levels[static_cast<std::size_t>(li)] = h;

        Params params = scenario_params(sc, sc.mu, sc.mu, h);   // epsilon tied to h
        const GrowthModel model = zero_model(sc.w_p);

        State init(grid);
        if (!zero_mass) init = barenblatt_initial_state(sc, grid);

        DtPolicy dtp;
        dtp.dt = sc.dt0 * static_cast<double>(sc.base_cells) / n;
        const RunResult rr = run(init, sc.t_end, dtp, params, model, grid);
        if (!rr.ok) {
            failures[static_cast<std::size_t>(li)] = rr.error;
            return;
        }

        double err = 0.0, norm = 0.0;
        if (zero_mass) {
            for (int k = 0; k < grid.cells(); ++k) err += std::fabs(rr.final_state.w[k]);
            err *= grid.cell_volume();
        } else {
            const BarenblattParams bp = make_barenblatt(sc.gamma, sc.mu, sc.mass, sc.t0, sc.dim);
            for (int k = 0; k < grid.cells(); ++k) {
                const double exact = barenblatt(grid.center(k), sc.t_end, bp);
                err += std::fabs(rr.final_state.w[k] - exact);
                norm += exact;
            }
            err *= grid.cell_volume();
            norm *= grid.cell_volume();
        }
        rep.errors[static_cast<std::size_t>(li)] = norm > 0.0 ? err / norm : err;
    });

    for (const auto& f : failures)
        if (!f.empty()) {
            rep.pass = false;
            rep.notes.push_back("level failed: " + f);
            return rep;
        }

    const double floor = 1e-14;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rep.errors.size(); ++i) {
        if (rep.errors[i] > floor) {
            lx.push_back(std::log(rep.levels[i]));
            ly.push_back(std::log(rep.errors[i]));
        }
        if (i > 0) {
            const double ratio = rep.errors[i] > floor ? rep.errors[i - 1] / rep.errors[i] : 0.0;
            rep.orders.push_back(ratio > 0.0 ? std::log2(ratio) : 0.0);
        }
    }
    if (lx.size() >= 2) {
        rep.observed_order = ls_slope(lx, ly);
        rep.pass = rep.observed_order >= 0.8 && rep.errors.back() <= 0.02;
    } else {
        // all errors at the rounding floor; nothing to fit
        rep.observed_order = 0.0;
        rep.pass = rep.errors.back() <= 0.02;
        rep.notes.push_back("errors at rounding floor; order fit skipped");
    }
    rep.metrics["final_error"] = rep.errors.back();
    return rep;
}

EpsilonSweep run_epsilon_sweep(const PmeScenario& sc, double mu, double nu,
                               const std::vector<double>& eps_levels, int cells,
                               int workers) {
    EpsilonSweep sweep;
    sweep.levels.resize(eps_levels.size());

    parallel_levels(static_cast<int>(eps_levels.size()), workers, [&](int li) {
        const std::size_t i = static_cast<std::size_t>(li);
        SweepLevel& lvl = sweep.levels[i];
        lvl.epsilon = eps_levels[i];

        const Grid grid = scenario_grid(sc, cells);
        Params params = scenario_params(sc, mu, nu, eps_levels[i]);
        const GrowthModel model = zero_model(sc.w_p);
        const State init = barenblatt_initial_state(sc, grid);

        lvl.trajectory.grid = grid;
        lvl.trajectory.states.clear();
        lvl.trajectory.states.push_back(init);

        double max_w = field_max(init.w);
        double min_u = 0.0;
        double max_id = 0.0;
        RunHooks hooks;
        hooks.on_step = [&](int, const State& s, const StepReport& rep) {
            lvl.trajectory.states.push_back(s);
            max_w = std::max(max_w, field_max(s.w));
            min_u = std::min({min_u, rep.min_u1_preclip, rep.min_u2_preclip});
            max_id = std::max(max_id, rep.identity_residual);
        };

        DtPolicy dtp;
        dtp.dt = sc.dt0 * static_cast<double>(sc.base_cells) / cells;
        const RunResult rr = run(init, sc.t_end, dtp, params, model, grid, hooks);
        lvl.ok = rr.ok;
        lvl.error = rr.error;
        lvl.max_w = max_w;
        lvl.min_u_preclip = min_u;
        lvl.max_identity_residual = max_id;
    });

    for (std::size_t i = 0; i < sweep.levels.size(); ++i)
        if (!sweep.levels[i].ok) sweep.all_ok = false;

    if (sweep.all_ok) {
        for (std::size_t i = 0; i < sweep.levels.size(); ++i) {
            sweep.levels[i].dissipation_budget =
                dissipation_budget(sweep.levels[i].trajectory, sc.gamma);
        }
        for (std::size_t i = 0; i + 1 < sweep.levels.size(); ++i)
            sweep.distances.push_back(h1_trajectory_distance(
                sweep.levels[i].trajectory, sweep.levels[i + 1].trajectory, sc.gamma + 1.0));
    }
    return sweep;
}

StudyReport epsilon_study(const PmeScenario& sc, const std::vector<double>& eps_levels,
                          int cells, int workers) {
    if (eps_levels.empty()) throw std::invalid_argument("epsilon_study: need eps levels");
    for (std::size_t i = 1; i < eps_levels.size(); ++i)
        if (!(eps_levels[i] < eps_levels[i - 1]))
            throw std::invalid_argument("epsilon_study: eps levels must strictly decrease");

    EpsilonSweep sweep = run_epsilon_sweep(sc, sc.mu, sc.mu, eps_levels, cells, workers);

    StudyReport rep;
    rep.study = "epsilon";
    rep.levels = eps_levels;
    rep.errors = sweep.distances;
    for (std::size_t i = 0; i < sweep.levels.size(); ++i) {
        rep.metrics["budget_" + std::to_string(i)] = sweep.levels[i].dissipation_budget;
        if (!sweep.levels[i].ok) rep.notes.push_back("level failed: " + sweep.levels[i].error);
    }
    bool cauchy = sweep.all_ok;
    for (std::size_t i = 1; i < sweep.distances.size(); ++i)
        cauchy = cauchy && sweep.distances[i] <= sweep.distances[i - 1];
    rep.pass = cauchy;   // vacuously true for a single level
    return rep;
}

StudyReport asymmetric_mobility_study(const PmeScenario& sc, double mu, double nu,
                                      const std::vector<double>& eps_levels, int cells,
                                      int workers) {
    if (eps_levels.empty())
        throw std::invalid_argument("asymmetric_mobility_study: need eps levels");
    for (double e : eps_levels)
        if (!(e > 0.0))
            throw std::invalid_argument("asymmetric_mobility_study: eps levels must be > 0");

    EpsilonSweep sweep = run_epsilon_sweep(sc, mu, nu, eps_levels, cells, workers);

    StudyReport rep;
    rep.study = "asymmetric";
    rep.levels = eps_levels;
    rep.errors = sweep.distances;   // exploratory output, no assertion on the trend
    bool invariants = sweep.all_ok;
    for (std::size_t i = 0; i < sweep.levels.size(); ++i) {
        const SweepLevel& l = sweep.levels[i];
        rep.metrics["budget_" + std::to_string(i)] = l.dissipation_budget;
        rep.metrics["max_w_" + std::to_string(i)] = l.max_w;
        rep.metrics["min_u_" + std::to_string(i)] = l.min_u_preclip;
        rep.metrics["identity_" + std::to_string(i)] = l.max_identity_residual;
        if (!l.ok) {
            rep.notes.push_back("level failed: " + l.error);
            continue;
        }
        invariants = invariants && l.max_w <= sc.w_p + 1e-8 && l.min_u_preclip >= -1e-10 &&
                     l.max_identity_residual <= 1e-10 && std::isfinite(l.dissipation_budget);
    }
    rep.pass = invariants;
    return rep;
}

StudyReport segregation_study(const SegregationScenario& sc, const Grid& grid,
                              bool require_disjoint) {
    if (grid.dim != 1)
        throw std::invalid_argument("segregation_study: one space dimension only");

    State init(grid);
    for (int k = 0; k < grid.cells(); ++k) {
        init.u1[k] = bump_value(sc.bump1, grid.center(k), 1);
        init.u2[k] = bump_value(sc.bump2, grid.center(k), 1);
        init.w[k] = init.u1[k] + init.u2[k];
    }
    if (require_disjoint)
        for (int k = 0; k < grid.cells(); ++k)
            if (init.u1[k] > 0.0 && init.u2[k] > 0.0)
                throw std::invalid_argument(
                    "segregation_study: initial supports overlap at the cell level");

    Params params;
    params.mu = params.nu = sc.mu;
    params.gamma = sc.gamma;
    params.epsilon = sc.epsilon;
    params.lift_initial = false;

    const GrowthModel model = zero_model(sc.w_p);

    StudyReport rep;
    rep.study = "segregation";

    auto rel_overlap = [&](const State& s) {
        const double vol = grid.cell_volume();
        double ov = 0.0, m1 = 0.0, m2 = 0.0;
        for (int k = 0; k < grid.cells(); ++k) {
            ov += std::max(s.u1[k], 0.0) * std::max(s.u2[k], 0.0);
            m1 += s.u1[k];
            m2 += s.u2[k];
        }
        ov *= vol;
        m1 *= vol;
        m2 *= vol;
        return m1 > 0.0 && m2 > 0.0 ? ov / (m1 * m2) : 0.0;
    };

    rep.levels.push_back(0.0);
    rep.errors.push_back(rel_overlap(init));
    RunHooks hooks;
    hooks.on_step = [&](int, const State& s, const StepReport&) {
        rep.levels.push_back(s.t);
        rep.errors.push_back(rel_overlap(s));
    };

    DtPolicy dtp;
    dtp.dt = sc.dt;
    const RunResult rr = run(init, sc.t_end, dtp, params, model, grid, hooks);

    double worst = 0.0;
    for (double v : rep.errors) worst = std::max(worst, v);
    rep.metrics["max_relative_overlap"] = worst;
    rep.metrics["threshold"] = sc.overlap_threshold;
    if (!rr.ok) rep.notes.push_back("run failed: " + rr.error);
    rep.pass = rr.ok && worst <= sc.overlap_threshold;   // a finding, not an error
    return rep;
}

void write_study_report(const std::string& dir, const StudyReport& report) {
    if (dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json j;
    j["study"] = report.study;
    j["pass"] = report.pass;
    j["levels"] = report.levels;
    j["errors"] = report.errors;
    j["orders"] = report.orders;
    j["observed_order"] = report.observed_order;
    j["metrics"] = report.metrics;
    j["notes"] = report.notes;
    std::ofstream(fs::path(dir) / "summary.json") << j.dump(2) << "\n";

    std::ofstream csv(fs::path(dir) / "levels.csv");
    csv << "index,level,value\n";
    char buf[96];
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const double v = i < report.errors.size() ? report.errors[i]
                                                  : std::numeric_limits<double>::quiet_NaN();
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, report.levels[i], v);
        csv << buf;
    }
}

}  // namespace crossdiff
