#pragma once

#include <string>
#include <vector>

#include "rsd/field_core.hpp"
#include "rsd/piecewise_affine.hpp"

namespace rsd {

// Geometry of one tile of the grain-boundary array.  Continuity of the tangential
// strain on the tile boundary forces the tile half-height H = tau eps / (4 sin alpha),
// so each core carries exactly b = (tau eps, 0).  Rings are squares of half-width
// r[n] = 2^n r0, n < m, closed by the outer ring r[m] = H.
struct DyadicFrame {
    double r0 = 0.0;
    double H = 0.0;
    double b = 0.0;        // tau eps
    int N = 0;             // tiles, L / H, even
    int nbar = 0;          // floor(log2(1/alpha))
    int m = 0;             // index of the outer ring
    std::vector<double> r; // r[0] = r0, ..., r[m] = H

    double tile_center(int k) const;
};

// Throws std::invalid_argument if L / H is not an even integer (1e-9 relative),
// if H < 1.5 r0, or if the strip [-H, H] reaches the boundary bands.
DyadicFrame build_frame(const Params& p);

// Largest eps <= eps_max for which L / H is an even integer.
double compatible_epsilon(double alpha, double L, double tau, double eps_max);

// Tile-local maps on [-H, H]^2.  v is the tile map; v1 is the slip map (id below the
// x-axis, id -+ b/2 on the upper left/right) and v2 = v o v1^{-1} on the v1 images.
PiecewiseAffineMap build_v(const Params& p);
PiecewiseAffineMap build_v1(const Params& p);
// Throws std::invalid_argument when v1 folds a triangle, which happens for tau/lambda above about 1/2.
PiecewiseAffineMap build_v2(const Params& p);

struct GrainBoundary {
    DyadicFrame frame;
    PiecewiseAffineMap u;  // on all of [-L, L]^2
    CoreSet cores;
};

// N stacked copies of v, R_alpha p left of the strip and R_{-alpha} p right of it.
GrainBoundary compose_tile(const Params& p);

// (1/tau) sum over triangles of |T \ B_{lambda eps}(S)| dist^2(grad u|_T); disks are
// replaced by inscribed 64-gons for the clipping.
double gb_elastic_energy(const PiecewiseAffineMap& u, const CoreSet& S, const Params& p);

struct GbScanRow {
    double alpha = 0.0;
    double epsilon = 0.0;
    int N = 0;
    double E_el = 0.0;
    double E_core = 0.0;
    double F = 0.0;
    double ratio = 0.0;  // F / (tau eps alpha L (|log2 alpha| + 1))
};

// One row per alpha, eps = compatible_epsilon(alpha, L, tau, L / 2^10).
// Throws std::invalid_argument for an empty list.
std::vector<GbScanRow> gb_scan(const std::vector<double>& alphas, const Params& base);

}  // namespace rsd
