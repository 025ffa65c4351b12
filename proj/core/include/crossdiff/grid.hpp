#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace crossdiff {

/// Uniform cell-centered mesh on an axis-aligned box with no-flux boundaries.
/// 1D grids keep ny = 1 and ignore the y metadata.
struct Grid {
    int dim = 1;
    int nx = 0;
    int ny = 1;
    double hx = 0.0;
    double hy = 0.0;
    double x0 = 0.0;   // lower-left corner of the box
    double y0 = 0.0;

    int cells() const { return nx * ny; }
    double cell_volume() const { return dim == 1 ? hx : hx * hy; }

    int index(int i, int j = 0) const { return j * nx + i; }
    std::array<double, 2> center(int i, int j) const {
        return {x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy};
    }
    std::array<double, 2> center(int cell) const { return center(cell % nx, cell / nx); }

    // interior faces, one array per axis:
    //   x-face f between cells (i,j) and (i+1,j): f = j*(nx-1) + i
    //   y-face f between cells (i,j) and (i,j+1): f = j*nx + i
    int x_face_count() const { return (nx - 1) * ny; }
    int y_face_count() const { return dim == 2 ? nx * (ny - 1) : 0; }
};

/// extents/lengths sized by dim; origin defaults to zero. Rejects extents < 2
/// per axis and non-positive lengths.
Grid make_grid(int dim, const std::vector<int>& extents, const std::vector<double>& lengths,
               const std::vector<double>& origin = {});

/// Per-cell scalar values aligned with a Grid.
struct Field {
    std::vector<double> v;

    Field() = default;
    explicit Field(const Grid& g) : v(static_cast<std::size_t>(g.cells()), 0.0) {}
    Field(const Grid& g, double fill) : v(static_cast<std::size_t>(g.cells()), fill) {}

    double& operator[](std::size_t k) { return v[k]; }
    double operator[](std::size_t k) const { return v[k]; }
    std::size_t size() const { return v.size(); }
};

double field_min(const Field& f);
double field_max(const Field& f);
double max_norm(const Field& f);
double max_norm_diff(const Field& a, const Field& b);
bool all_finite(const Field& f);

/// Volume-weighted cell sum, i.e. the discrete integral of f over the box.
double cell_sum(const Field& f, const Grid& grid);

/// Per-interior-face scalars, one array per axis (see Grid for face indexing).
struct FaceField {
    std::vector<double> x;
    std::vector<double> y;

    FaceField() = default;
    explicit FaceField(const Grid& g)
        : x(static_cast<std::size_t>(g.x_face_count()), 0.0),
          y(static_cast<std::size_t>(g.y_face_count()), 0.0) {}
    FaceField(const Grid& g, double fill)
        : x(static_cast<std::size_t>(g.x_face_count()), fill),
          y(static_cast<std::size_t>(g.y_face_count()), fill) {}
};

/// Face mobilities of the transport operator. The combined entry is assembled
/// from the species entries, never recomputed from w alone, so the discrete
/// w = u1 + u2 identity telescopes exactly.
struct FaceMobility {
    FaceField species1;   // avg(u1) * avg(w)^{gamma-1} per face
    FaceField species2;   // avg(u2) * avg(w)^{gamma-1} per face
    FaceField combined;   // mu*species1 + nu*species2, face by face
};

FaceMobility face_mobilities(const Field& u1, const Field& u2, const Field& w,
                             double mu, double nu, double gamma, const Grid& grid);

/// Cell-centered divergence of mob * grad(w^gamma), realized per face as
/// mob_f * (w_R^gamma - w_L^gamma)/h with zero flux through boundary faces.
/// The volume-weighted cell sum of the result telescopes to zero.
Field div_flux(const FaceField& mob, const Field& w, double gamma, const Grid& grid);

/// 3-point (1D) / 5-point (2D) stencil with Neumann ghost reflection.
Field laplacian(const Field& f, const Grid& grid);

/// CSV snapshot, one row per cell. Columns: index,x,value (1D) or
/// index,x,y,value (2D); values at 17 significant digits.
void write_field_csv(std::ostream& os, const Grid& grid, const Field& f);

}  // namespace crossdiff
