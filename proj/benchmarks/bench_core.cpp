#include <benchmark/benchmark.h>

#include "crossdiff/experiments.hpp"
#include "crossdiff/linear.hpp"
#include "crossdiff/scheme.hpp"

using namespace crossdiff;

namespace {

Grid grid_1d(int n) { return make_grid(1, {n}, {5.0}, {-2.5}); }
Grid grid_2d(int n) { return make_grid(2, {n, n}, {1.0, 1.0}); }

State bump_state(const Grid& g) {
    State s(g);
    BumpSpec b1{0.45, 0.25, {g.x0 + 0.35 * g.nx * g.hx, g.y0 + 0.5 * g.ny * g.hy}};
    BumpSpec b2{0.30, 0.25, {g.x0 + 0.65 * g.nx * g.hx, g.y0 + 0.5 * g.ny * g.hy}};
    b1.radius = 0.25 * g.nx * g.hx;
    b2.radius = 0.25 * g.nx * g.hx;
    for (int k = 0; k < g.cells(); ++k) {
        s.u1[k] = bump_value(b1, g.center(k), g.dim);
        s.u2[k] = bump_value(b2, g.center(k), g.dim);
    }
    sync_w(s);
    return s;
}

}  // namespace

static void BM_FaceMobilities2D(benchmark::State& state) {
    const Grid g = grid_2d(static_cast<int>(state.range(0)));
    const State s = bump_state(g);
    for (auto _ : state) {
        FaceMobility m = face_mobilities(s.u1, s.u2, s.w, 1.0, 2.0, 2.0, g);
        benchmark::DoNotOptimize(m.combined.x.data());
    }
    state.SetItemsProcessed(state.iterations() * g.cells());
}
BENCHMARK(BM_FaceMobilities2D)->Arg(64)->Arg(128)->Arg(256);

static void BM_DivFlux2D(benchmark::State& state) {
    const Grid g = grid_2d(static_cast<int>(state.range(0)));
    const State s = bump_state(g);
    const FaceMobility m = face_mobilities(s.u1, s.u2, s.w, 1.0, 2.0, 2.0, g);
    for (auto _ : state) {
        Field out = div_flux(m.combined, s.w, 2.0, g);
        benchmark::DoNotOptimize(out.v.data());
    }
    state.SetItemsProcessed(state.iterations() * g.cells());
}
BENCHMARK(BM_DivFlux2D)->Arg(64)->Arg(128)->Arg(256);

static void BM_HeatSolve2D(benchmark::State& state) {
    const Grid g = grid_2d(static_cast<int>(state.range(0)));
    const State s = bump_state(g);
    const FaceMobility m = face_mobilities(s.u1, s.u2, s.w, 1.0, 1.0, 2.0, g);
    LinearSystem sys = make_backward_euler_system(g, 250.0, &m.combined, 1e-4);
    for (int k = 0; k < g.cells(); ++k) sys.rhs[k] = 250.0 * s.w[k];
    for (auto _ : state) {
        Field x = s.w;
        SolveResult res = solve_pcg(sys, x, 1e-12);
        benchmark::DoNotOptimize(res.iterations);
    }
}
BENCHMARK(BM_HeatSolve2D)->Arg(32)->Arg(64)->Arg(128);

static void BM_PicardAdvance(benchmark::State& state) {
    const bool twod = state.range(0) == 2;
    const Grid g = twod ? grid_2d(64) : grid_1d(256);
    const State s = bump_state(g);
    Params params;
    params.gamma = 2.0;
    params.epsilon = 1e-4;
    const GrowthModel model = logistic_model(0.5, 1.0);
    for (auto _ : state) {
        auto [next, rep] = picard_advance(s, twod ? 4e-3 : 2e-3, params, model, g);
        benchmark::DoNotOptimize(rep.picard_iterations);
    }
}
BENCHMARK(BM_PicardAdvance)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
