#include "crossdiff/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "crossdiff/diagnostics.hpp"

namespace crossdiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InvariantMonitor {
    double worst_max_w = -1e300;      // max over steps of max(w)
    double worst_min_u = 1e300;       // min over steps of pre-clip species minimum
    double worst_identity = 0.0;
    double worst_gronwall_excess = -1e300;   // l2(t) - (l2(0) e^{2 M0 t} + slack)
    double worst_l2_step_excess = -1e300;    // per-step monitor (d/dt) l2 <= 2 M0 l2
    bool fields_finite = true;

    std::string violated(const CheckSpec& checks, double w_p) const {
        if (!fields_finite) return "finite fields";
        if (worst_max_w > w_p + checks.max_principle_tol) return "max principle (w <= w_p)";
        if (worst_min_u < -checks.nonnegativity_tol) return "nonnegativity (u_i >= 0)";
        if (worst_identity > checks.identity_tol) return "identity (w = u1 + u2)";
        if (worst_gronwall_excess > 0.0) return "L2 Gronwall bound";
        return {};
    }
};

void write_snapshot(const fs::path& dir, int index, double t, const Grid& grid,
                    const State& s) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "snap_%04d_t%.6f", index, t);
    const char* fields[3] = {"u1", "u2", "w"};
    const Field* data[3] = {&s.u1, &s.u2, &s.w};
    for (int f = 0; f < 3; ++f) {
        std::ofstream os(dir / (std::string(stem) + "_" + fields[f] + ".csv"));
        write_field_csv(os, grid, *data[f]);
    }
}

json step_line(double t, double dt, const StepReport& rep) {
    json j;
    j["t"] = t;
    j["dt"] = dt;
    j["picard_iterations"] = rep.picard_iterations;
    j["picard_residual"] = rep.picard_residual;
    j["linear_iterations"] = rep.linear_iterations;
    j["identity_residual"] = rep.identity_residual;
    j["min_u1_preclip"] = rep.min_u1_preclip;
    j["min_u2_preclip"] = rep.min_u2_preclip;
    j["clipped_cells"] = rep.clipped_cells;
    j["converged"] = rep.converged;
    return j;
}

int single_run(const RunConfig& cfg, const CliOptions& opts, const fs::path& out_dir) {
    const Grid grid = build_grid(cfg.grid);
    const State init = build_initial_state(cfg, grid);

    const H1Report h1 = validate_h1(cfg.model, 2.0 * cfg.model.w_p, 10000);
    if (opts.verbose && !h1.pass())
        std::cout << "warning: model fails the structural hypothesis checks\n"
                  << h1.describe();

    const double M0 = reaction_bound(cfg.model, 10001).M0;

    std::ofstream diag_csv(out_dir / "diagnostics.csv");
    write_diagnostics_header(diag_csv);
    std::ofstream steps_jsonl(out_dir / "steps.jsonl");
    fs::create_directories(out_dir / "snapshots");

    // initial records (with the lift applied, matching what run() will step)
    State init_eff = init;
    if (cfg.params.lift_initial)
        for (int k = 0; k < grid.cells(); ++k) {
            init_eff.u1[k] += cfg.params.epsilon;
            init_eff.w[k] += cfg.params.epsilon;
        }
    const DiagnosticsRecord rec0 = record_diagnostics(init_eff, cfg.params, grid);
    write_diagnostics_row(diag_csv, rec0);
    write_snapshot(out_dir / "snapshots", 0, 0.0, grid, init_eff);

    InvariantMonitor mon;
    int snapshot_index = 1;
    double prev_l2 = rec0.l2_w;
    double prev_t = init.t;
    DiagnosticsRecord last_rec = rec0;

    RunHooks hooks;
    hooks.on_step = [&](int step_index, const State& s, const StepReport& rep) {
        const DiagnosticsRecord r = record_diagnostics(s, cfg.params, grid);
        write_diagnostics_row(diag_csv, r);
        steps_jsonl << step_line(s.t, s.t - prev_t, rep).dump() << "\n";

        mon.fields_finite = mon.fields_finite && all_finite(s.u1) && all_finite(s.u2) &&
                            all_finite(s.w);
        mon.worst_max_w = std::max(mon.worst_max_w, r.max_w);
        mon.worst_min_u = std::min({mon.worst_min_u, rep.min_u1_preclip, rep.min_u2_preclip});
        mon.worst_identity = std::max(mon.worst_identity, r.identity_residual);
        const double bound = rec0.l2_w * std::exp(2.0 * M0 * (s.t - init.t)) +
                             cfg.checks.gronwall_slack;
        mon.worst_gronwall_excess = std::max(mon.worst_gronwall_excess, r.l2_w - bound);
        const double dt = s.t - prev_t;
        if (dt > 0.0) {
            const double step_excess =
                (r.l2_w - prev_l2) / dt - 2.0 * M0 * r.l2_w - 1e-8 * r.l2_w;
            mon.worst_l2_step_excess = std::max(mon.worst_l2_step_excess, step_excess);
        }

        if (cfg.output.snapshot_every_steps > 0) {
            if (step_index % cfg.output.snapshot_every_steps == 0)
                write_snapshot(out_dir / "snapshots", snapshot_index++, s.t, grid, s);
        } else {
            while (snapshot_index <= cfg.output.snapshots &&
                   s.t >= cfg.t_end * snapshot_index / cfg.output.snapshots - 1e-12) {
                write_snapshot(out_dir / "snapshots", snapshot_index, s.t, grid, s);
                ++snapshot_index;
            }
        }
        prev_l2 = r.l2_w;
        prev_t = s.t;
        last_rec = r;
    };

    const RunResult rr = run(init, cfg.t_end, cfg.dt_policy, cfg.params, cfg.model, grid, hooks);

    json summary;
    summary["schema_version"] = 1;
    summary["mode"] = "simulation";
    summary["run"]["ok"] = rr.ok;
    summary["run"]["error"] = rr.error;
    summary["run"]["steps"] = rr.steps;
    summary["run"]["t_reached"] = rr.t_reached;
    summary["run"]["clipped_steps"] = rr.clipped_steps;
    summary["run"]["halvings_used"] = rr.halvings_used;
    summary["run"]["total_picard_iterations"] = rr.total_picard_iterations;
    summary["model_h1_pass"] = h1.pass();
    summary["reaction_bound_m0"] = M0;

    const std::string violated = rr.steps > 0 ? mon.violated(cfg.checks, cfg.model.w_p)
                                              : std::string{};
    summary["invariants"]["violated"] = violated;
    summary["invariants"]["max_w"] = rr.steps > 0 ? mon.worst_max_w : rec0.max_w;
    summary["invariants"]["min_u_preclip"] = rr.steps > 0 ? mon.worst_min_u : 0.0;
    summary["invariants"]["identity_residual"] = mon.worst_identity;
    summary["invariants"]["gronwall_excess"] =
        rr.steps > 0 ? mon.worst_gronwall_excess : -cfg.checks.gronwall_slack;
    summary["invariants"]["l2_step_excess"] = rr.steps > 0 ? mon.worst_l2_step_excess : 0.0;

    summary["final"]["t"] = last_rec.t;
    summary["final"]["mass_w"] = last_rec.mass_w;
    summary["final"]["mass_u1"] = last_rec.mass_u1;
    summary["final"]["mass_u2"] = last_rec.mass_u2;
    summary["final"]["max_w"] = last_rec.max_w;

    std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";

    if (!rr.ok) {
        std::cerr << "run failed: " << rr.error << "\n";
        return kExitViolation;
    }
    if (!violated.empty()) {
        std::cerr << "invariant violated: " << violated << "\n";
        return kExitViolation;
    }
    if (opts.verbose) std::cout << "run complete: " << rr.steps << " steps\n";
    return kExitOk;
}

PmeScenario scenario_from_config(const RunConfig& cfg) {
    PmeScenario sc;
    sc.gamma = cfg.params.gamma;
    sc.mu = cfg.params.mu;
    sc.dim = cfg.grid.dim;
    sc.domain_length = cfg.grid.lengths[0];
    sc.t_end = cfg.t_end;
    sc.w_p = cfg.model.w_p;
    sc.base_cells = cfg.grid.cells[0];
    sc.dt0 = cfg.dt_policy.dt;
    if (cfg.initial.profile == ProfileKind::BarenblattSplit) {
        sc.mass = cfg.initial.mass;
        sc.t0 = cfg.initial.t0;
        sc.eta = cfg.initial.eta;
    }
    return sc;
}

void write_sweep_series(const fs::path& out_dir, const PmeScenario& sc, const RunConfig& cfg,
                        const EpsilonSweep& sweep) {
    for (std::size_t i = 0; i < sweep.levels.size(); ++i) {
        const SweepLevel& lvl = sweep.levels[i];
        if (!lvl.ok) continue;
        const fs::path dir = out_dir / ("level_" + std::to_string(i));
        fs::create_directories(dir);
        Params p = cfg.params;
        p.gamma = sc.gamma;
        p.epsilon = lvl.epsilon;
        std::ofstream csv(dir / "diagnostics.csv");
        write_diagnostics_header(csv);
        for (const State& s : lvl.trajectory.states)
            write_diagnostics_row(csv, record_diagnostics(s, p, lvl.trajectory.grid));
    }
}

int study_run(const RunConfig& cfg, const CliOptions& opts, const fs::path& out_dir) {
    StudyReport report;
    const PmeScenario sc = scenario_from_config(cfg);

    const bool sweep_study = cfg.study.kind == StudyKind::Pme ||
                             cfg.study.kind == StudyKind::Epsilon ||
                             cfg.study.kind == StudyKind::Asymmetric;
    if (sweep_study && cfg.initial.profile != ProfileKind::BarenblattSplit) {
        std::cerr << "the pme/epsilon/asymmetric studies need the barenblatt-split initial "
                     "profile (it carries mass, t0 and eta)\n";
        return kExitUsage;
    }

    switch (cfg.study.kind) {
        case StudyKind::Pme:
            report = pme_validation(cfg.study.pme_grids, sc, opts.workers);
            break;
        case StudyKind::Epsilon: {
            EpsilonSweep sweep = run_epsilon_sweep(sc, cfg.params.mu, cfg.params.mu,
                                                   cfg.study.eps_levels, cfg.grid.cells[0],
                                                   opts.workers);
            write_sweep_series(out_dir, sc, cfg, sweep);
            report = epsilon_study(sc, cfg.study.eps_levels, cfg.grid.cells[0], opts.workers);
            break;
        }
        case StudyKind::Asymmetric: {
            EpsilonSweep sweep =
                run_epsilon_sweep(sc, cfg.params.mu, cfg.params.nu, cfg.study.eps_levels,
                                  cfg.grid.cells[0], opts.workers);
            write_sweep_series(out_dir, sc, cfg, sweep);
            report = asymmetric_mobility_study(sc, cfg.params.mu, cfg.params.nu,
                                               cfg.study.eps_levels, cfg.grid.cells[0],
                                               opts.workers);
            break;
        }
        case StudyKind::Segregation: {
            if (cfg.initial.profile != ProfileKind::TwoBumps) {
                std::cerr << "segregation study needs the two-bumps initial profile\n";
                return kExitUsage;
            }
            SegregationScenario seg;
            seg.bump1 = cfg.initial.bump1;
            seg.bump2 = cfg.initial.bump2;
            seg.gamma = cfg.params.gamma;
            seg.mu = cfg.params.mu;
            seg.epsilon = cfg.params.epsilon;
            seg.w_p = cfg.model.w_p;
            seg.t_end = cfg.t_end;
            seg.dt = cfg.dt_policy.dt;
            seg.overlap_threshold = cfg.study.overlap_threshold;
            const Grid grid = build_grid(cfg.grid);
            report = segregation_study(seg, grid);
            break;
        }
        case StudyKind::None:
            return kExitUsage;   // unreachable; dispatched earlier
    }

    write_study_report(out_dir.string(), report);
    if (opts.verbose)
        std::cout << "study " << report.study << (report.pass ? " passed" : " did not pass")
                  << "\n";

    for (const std::string& n : report.notes)
        if (n.rfind("level failed:", 0) == 0 || n.rfind("run failed:", 0) == 0) {
            std::cerr << n << "\n";
            return kExitViolation;
        }
    if (report.study == "asymmetric" && !report.pass) {
        std::cerr << "asymmetric study: per-level invariants violated\n";
        return kExitViolation;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const CliOptions& opts) {
    if (opts.config_path.empty()) {
        std::cerr << "usage: crossdiff --config <path> [--out <dir>] [--study <name>]\n"
                     "                 [--workers <n>] [--verbose]\n";
        return kExitUsage;
    }

    ParseResult parsed = parse_config_file(opts.config_path);
    if (!parsed.ok()) {
        for (const std::string& e : parsed.errors) std::cerr << e << "\n";
        return kExitUsage;
    }
    RunConfig cfg = *parsed.config;

    if (!opts.out_override.empty()) cfg.output.dir = opts.out_override;
    if (!opts.study_override.empty()) {
        const auto kind = study_kind_from_name(opts.study_override);
        if (!kind) {
            std::cerr << "unknown study '" << opts.study_override << "'\n";
            return kExitUsage;
        }
        cfg.study.kind = *kind;
    }

    const auto t_start = std::chrono::system_clock::now();
    const fs::path out_dir(cfg.output.dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory '" << cfg.output.dir << "'\n";
        return kExitUsage;
    }

    // every run directory is self-describing
    std::ofstream(out_dir / "effective_config.json") << effective_config_json(cfg);

    int code = 0;
    try {
        code = cfg.study.kind == StudyKind::None ? single_run(cfg, opts, out_dir)
                                                 : study_run(cfg, opts, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = kExitViolation;
    }

    // timestamps live outside summary.json so summaries stay byte-identical
    const auto t_stop = std::chrono::system_clock::now();
    json meta;
    meta["wall_seconds"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t_stop - t_start).count() / 1e3;
    meta["completed_unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    t_stop.time_since_epoch())
                                    .count();
    std::ofstream(out_dir / "run_meta.json") << meta.dump(2) << "\n";

    return code;
}

}  // namespace crossdiff
