#include <doctest.h>

#include <cmath>

#include "crossdiff/experiments.hpp"
#include "test_util.hpp"

using namespace crossdiff;

namespace {

// quadrature of the analytic profile over a symmetric box
double profile_mass(const BarenblattParams& bp, double t, double L, int n) {
    const double h = L / n;
    double m = 0.0;
    if (bp.dim == 1) {
        for (int i = 0; i < n; ++i) m += barenblatt({-0.5 * L + (i + 0.5) * h, 0.0}, t, bp) * h;
    } else {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                m += barenblatt({-0.5 * L + (i + 0.5) * h, -0.5 * L + (j + 0.5) * h}, t, bp) *
                     h * h;
    }
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("experiments");

TEST_CASE("barenblatt profile basics") {
    const BarenblattParams bp = make_barenblatt(2.0, 1.0, 1.0, 1.0, 1);
    CHECK(bp.m == doctest::Approx(3.0));
    CHECK(bp.c == doctest::Approx(2.0 / 3.0));

    SUBCASE("compact support") {
        const double R = barenblatt_support_radius(0.0, bp);
        CHECK(barenblatt({R * 1.001, 0.0}, 0.0, bp) == 0.0);
        CHECK(barenblatt({R * 0.999, 0.0}, 0.0, bp) > 0.0);
        CHECK(barenblatt({-R * 1.5, 0.0}, 0.0, bp) == 0.0);
    }
    SUBCASE("mass is preserved in time") {
        const double m0 = profile_mass(bp, 0.0, 8.0, 8192);
        const double m1 = profile_mass(bp, 1.0, 8.0, 8192);
        CHECK(m0 == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(m1 == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("peak decays in time") {
        const double p0 = barenblatt({0.0, 0.0}, 0.0, bp);
        const double p1 = barenblatt({0.0, 0.0}, 0.5, bp);
        const double p2 = barenblatt({0.0, 0.0}, 1.0, bp);
        CHECK(p0 > p1);
        CHECK(p1 > p2);
    }
    SUBCASE("2D mass") {
        const BarenblattParams bp2 = make_barenblatt(2.0, 1.0, 0.5, 1.0, 2);
        CHECK(profile_mass(bp2, 0.0, 8.0, 2048) == doctest::Approx(0.5).epsilon(1e-3));
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(make_barenblatt(1.0, 1.0, 1.0, 1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(make_barenblatt(2.0, 0.0, 1.0, 1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(make_barenblatt(2.0, 1.0, -1.0, 1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(make_barenblatt(2.0, 1.0, 1.0, 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(make_barenblatt(2.0, 1.0, 1.0, 1.0, 3), std::invalid_argument);
    }
}

TEST_CASE("barenblatt analytic time derivative matches a centered difference") {
    const BarenblattParams bp = make_barenblatt(2.0, 1.5, 1.0, 1.0, 1);
    const double R = barenblatt_support_radius(0.2, bp);
    for (double frac : {0.0, 0.3, 0.7}) {
        const std::array<double, 2> x{frac * R * 0.9, 0.0};
        const double dt = 1e-5;
        const double fd =
            (barenblatt(x, 0.2 + dt, bp) - barenblatt(x, 0.2 - dt, bp)) / (2.0 * dt);
        CHECK(barenblatt_dt(x, 0.2, bp) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("barenblatt solves the PME at second order inside the support") {
    // centered-difference residual of dv/dt - c lap(v^m) with the analytic
    // time derivative, strictly inside the support
    const BarenblattParams bp = make_barenblatt(2.0, 1.0, 1.0, 1.0, 1);
    const double t = 0.3;
    const double R = barenblatt_support_radius(t, bp);

    auto residual = [&](double h) {
        double worst = 0.0;
        for (double frac = -0.6; frac <= 0.6; frac += 0.12) {
            const double x = frac * R;
            auto vm = [&](double xx) {
                return std::pow(barenblatt({xx, 0.0}, t, bp), bp.m);
            };
            const double lap = (vm(x + h) - 2.0 * vm(x) + vm(x - h)) / (h * h);
            const double r = barenblatt_dt({x, 0.0}, t, bp) - bp.c * lap;
            worst = std::max(worst, std::fabs(r));
        }
        return worst;
    };
    const double r1 = residual(1e-2);
    const double r2 = residual(5e-3);
    const double r3 = residual(2.5e-3);
    CHECK(std::log2(r1 / r2) >= 1.9);
    CHECK(std::log2(r2 / r3) >= 1.9);
}

TEST_CASE("scenario helpers build split-consistent initial data") {
    PmeScenario sc;
    sc.eta = 0.3;
    const Grid g = scenario_grid(sc, 64);
    CHECK(g.x0 == doctest::Approx(-2.5));
    const State s = barenblatt_initial_state(sc, g);
    for (int k = 0; k < g.cells(); ++k) {
        CHECK(s.u1[k] >= 0.0);
        CHECK(s.u2[k] >= 0.0);
        CHECK(s.w[k] == doctest::Approx(s.u1[k] + s.u2[k]).epsilon(1e-15));
        if (s.w[k] > 0.0) CHECK(s.u1[k] / s.w[k] == doctest::Approx(0.3));
    }
    CHECK(cell_sum(s.w, g) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("pme_validation edge cases") {
    SUBCASE("zero mass gives zero error") {
        PmeScenario sc;
        sc.mass = 0.0;
        sc.t_end = 0.05;
        const StudyReport rep = pme_validation({32, 64}, sc);
        for (double e : rep.errors) CHECK(e <= 1e-14);
        CHECK(rep.pass);
    }
    SUBCASE("coarse two-level run produces finite decreasing errors") {
        PmeScenario sc;
        sc.t_end = 0.1;
        sc.dt0 = 4e-3;
        sc.base_cells = 32;
        const StudyReport rep = pme_validation({32, 64}, sc);
        REQUIRE(rep.errors.size() == 2);
        CHECK(std::isfinite(rep.errors[0]));
        CHECK(rep.errors[1] < rep.errors[0]);
        CHECK(rep.orders.size() == 1);
    }
    SUBCASE("eta out of range is rejected") {
        PmeScenario sc;
        sc.eta = 1.5;
        CHECK_THROWS_AS(pme_validation({32}, sc), std::invalid_argument);
    }
}

TEST_CASE("epsilon sweep engine properties") {
    PmeScenario sc;
    sc.t_end = 0.1;
    sc.dt0 = 4e-3;
    sc.base_cells = 32;

    SUBCASE("constant-in-space scenario gives zero distances") {
        // constant initial data: the epsilon term is inactive on constants,
        // so every level produces the identical trajectory
        const Grid g = scenario_grid(sc, 16);
        Params p;
        p.gamma = sc.gamma;
        const GrowthModel model = zero_model(1.0);
        Trajectory a, b;
        for (double eps : {1e-2, 1e-4}) {
            Trajectory traj;
            traj.grid = g;
            State init(g);
            for (int k = 0; k < g.cells(); ++k) {
                init.u1[k] = 0.2;
                init.w[k] = 0.2;
            }
            traj.states.push_back(init);
            p.epsilon = eps;
            RunHooks hooks = capture_trajectory(traj);
            const RunResult rr = run(init, 0.05, DtPolicy{1e-3, 5}, p, model, g, hooks);
            REQUIRE(rr.ok);
            (eps == 1e-2 ? a : b) = std::move(traj);
        }
        CHECK(h1_trajectory_distance(a, b, sc.gamma + 1.0) <= 1e-12);
    }
    SUBCASE("single level passes vacuously") {
        const StudyReport rep = epsilon_study(sc, {1e-2}, 32);
        CHECK(rep.pass);
        CHECK(rep.errors.empty());
    }
    SUBCASE("levels must strictly decrease") {
        CHECK_THROWS_AS(epsilon_study(sc, {1e-2, 1e-2}, 32), std::invalid_argument);
    }
    SUBCASE("asymmetric study with mu = nu reproduces the epsilon pipeline") {
        const std::vector<double> levels{1e-2, 1e-3};
        const EpsilonSweep sym = run_epsilon_sweep(sc, 1.0, 1.0, levels, 32);
        const EpsilonSweep via_asym = run_epsilon_sweep(sc, 1.0, 1.0, levels, 32);
        REQUIRE(sym.distances.size() == 1);
        CHECK(sym.distances[0] == via_asym.distances[0]);   // deterministic pipeline

        const StudyReport asym = asymmetric_mobility_study(sc, 1.0, 1.0, levels, 32);
        CHECK(asym.errors[0] == sym.distances[0]);
        CHECK(asym.pass);
    }
}

TEST_CASE("split consistency: species stay nonnegative and sum to w for any eta") {
    PmeScenario sc;
    sc.eta = 0.3;
    sc.t_end = 0.1;
    sc.dt0 = 2e-3;
    sc.base_cells = 64;
    const EpsilonSweep sweep = run_epsilon_sweep(sc, sc.mu, sc.mu, {5.0 / 64.0}, 64);
    REQUIRE(sweep.all_ok);
    CHECK(sweep.levels[0].min_u_preclip >= -1e-12);
    for (const State& s : sweep.levels[0].trajectory.states) {
        CHECK(field_min(s.u1) >= -1e-12);
        CHECK(field_min(s.u2) >= -1e-12);
        double idres = 0.0;
        for (std::size_t k = 0; k < s.w.size(); ++k)
            idres = std::max(idres, std::fabs(s.w[k] - s.u1[k] - s.u2[k]));
        CHECK(idres <= 1e-10);
    }
}

TEST_CASE("asymmetric mobilities keep the proven invariants per level") {
    PmeScenario sc;
    sc.t_end = 0.1;
    sc.dt0 = 2e-3;
    sc.base_cells = 64;
    const StudyReport rep = asymmetric_mobility_study(sc, 2.0, 1.0, {1e-2, 1e-3}, 64);
    CHECK(rep.pass);
    CHECK(std::isfinite(rep.metrics.at("budget_0")));
    CHECK(std::isfinite(rep.metrics.at("budget_1")));
}

TEST_CASE("segregation study") {
    const Grid g = make_grid(1, {128}, {2.0});
    SegregationScenario sc;
    sc.bump1 = BumpSpec{0.5, 0.2, {0.5, 0.0}};
    sc.bump2 = BumpSpec{0.5, 0.2, {1.5, 0.0}};
    sc.t_end = 0.05;
    sc.dt = 1e-3;

    SUBCASE("an empty species never overlaps") {
        SegregationScenario empty = sc;
        empty.bump2.amplitude = 0.0;
        const StudyReport rep = segregation_study(empty, g);
        CHECK(rep.pass);
        for (double v : rep.errors) CHECK(v == 0.0);
    }
    SUBCASE("separated bumps stay below the threshold") {
        const StudyReport rep = segregation_study(sc, g);
        CHECK(rep.pass);
        CHECK(rep.metrics.at("max_relative_overlap") <= sc.overlap_threshold);
    }
    SUBCASE("overlapping control exceeds the threshold from t = 0") {
        SegregationScenario control = sc;
        control.bump2.center[0] = 0.8;
        const StudyReport rep = segregation_study(control, g, false);
        CHECK_FALSE(rep.pass);
        CHECK(rep.errors.front() > sc.overlap_threshold);
    }
    SUBCASE("cell-level overlap is rejected when disjointness is required") {
        SegregationScenario bad = sc;
        bad.bump2.center[0] = 0.8;
        CHECK_THROWS_AS(segregation_study(bad, g), std::invalid_argument);
    }
    SUBCASE("1D only") {
        const Grid g2 = make_grid(2, {8, 8}, {1.0, 1.0});
        CHECK_THROWS_AS(segregation_study(sc, g2), std::invalid_argument);
    }
}

TEST_CASE("study report files") {
    StudyReport rep;
    rep.study = "pme";
    rep.pass = true;
    rep.levels = {0.1, 0.05};
    rep.errors = {0.02, 0.01};
    rep.orders = {1.0};
    rep.observed_order = 1.0;
    const auto dir = testutil::make_temp_dir("study_report");
    write_study_report(dir.string(), rep);
    CHECK(std::filesystem::exists(dir / "summary.json"));
    CHECK(std::filesystem::exists(dir / "levels.csv"));
}

TEST_SUITE_END();
