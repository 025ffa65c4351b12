#pragma once

#include "crossdiff/grid.hpp"

namespace crossdiff {

/// Symmetric positive definite operator with Neumann structure, stored as a
/// full diagonal plus one coupling coefficient per interior face:
///   (A x)_K = diag_K x_K - sum_{faces f at K} coef_f x_neighbor.
/// Row sums of the coupling part vanish, so A applied to constants returns
/// the mass term exactly.
struct LinearSystem {
    const Grid* grid = nullptr;
    Field diag;
    FaceField coef;
    Field rhs;

    void apply(const Field& x, Field& y) const;
};

/// Backward-Euler operator (1/dt) I - div((D + eps) grad), per unit cell
/// volume: coef_f = (D_f + eps)/h_axis^2, diag = 1/dt + sum of its couplings,
/// so constants map to (1/dt) plus rounding. Pass transport = nullptr for
/// the pure eps-diffusion operator.
LinearSystem make_backward_euler_system(const Grid& grid, double inv_dt,
                                        const FaceField* transport, double eps);

struct SolveResult {
    int iterations = 0;
    double residual = 0.0;   // final |r|_2 / |b|_2
    bool converged = false;
};

/// Direct tridiagonal solve (1D only). No pivoting; the assembled systems are
/// diagonally dominant M-matrices.
SolveResult solve_thomas(const LinearSystem& sys, Field& x);

/// Jacobi-preconditioned conjugate gradients with the incoming x as initial
/// guess. Stops at |r|_2 <= rel_tol * |b|_2; recomputes the true residual on
/// exit and restarts (up to 3 times) if the recurrence drifted.
SolveResult solve_pcg(const LinearSystem& sys, Field& x, double rel_tol,
                      int max_iterations = 0);

/// Thomas in 1D, PCG otherwise.
SolveResult solve_spd(const LinearSystem& sys, Field& x, double rel_tol);

}  // namespace crossdiff
