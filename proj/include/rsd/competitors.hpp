#pragma once

#include <array>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rsd/field_core.hpp"

namespace rsd {

// Nodes of O.  A node is interior when it and its four neighbours lie in O and it is not on
// the edge of the grid; the other nodes of O form the discrete boundary.
struct RegionMask {
    Grid2 grid;
    std::vector<char> in;

    RegionMask() = default;
    explicit RegionMask(Grid2 g, bool fill = false) : grid(g), in(g.size(), fill) {}
    bool at(int i, int j) const { return in[grid.index(i, j)] != 0; }
    void set(int i, int j, bool v) { in[grid.index(i, j)] = v; }
    bool interior(int i, int j) const;
    std::size_t count() const;
    // Throws std::invalid_argument if O is empty, has no interior node or is not 4-connected.
    void validate() const;
    static RegionMask from(Grid2 g, const std::function<bool(Vec2)>& inside);
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveInfo {
    int unknowns = 0;
    int iterations = 0;
    double relative_residual = 0.0;
};

// Five-point Laplace equation at the interior nodes of O, values of `boundary` everywhere else.
// Conjugate gradients with an incomplete Cholesky preconditioner, relative residual 1e-10,
// at most 10 n^2 iterations (SolverError otherwise).  The result is clipped to the range of
// the boundary data it was solved from.
ScalarField solve_dirichlet(const RegionMask& mask, const ScalarField& boundary, SolveInfo* info = nullptr);

// Row i of the result is (D1+ u_i, D2+ u_i): forward differences, backward on the last node.
MatrixField forward_gradient(const std::array<ScalarField, 2>& u);
// Row-wise backward-difference divergence at the interior grid nodes, 0 on the grid edge.
// div- (forward_gradient(u)) is the five-point Laplacian.
std::array<ScalarField, 2> backward_divergence(const MatrixField& A);

struct HodgeSplit {
    std::array<ScalarField, 2> u;  // zero on the grid edge
    MatrixField F;                  // A - forward_gradient(u)
};

// Five-point Poisson problem Lap u_i = div- A_i with zero boundary values, solved exactly by
// a 2D sine transform, so div- F vanishes to rounding at the interior nodes.
HodgeSplit hodge_split(const MatrixField& A);
MatrixField recompose(const HodgeSplit& h);

struct HarmonicCompetitor {
    MatrixField field;            // A~ = forward_gradient(u~) + F
    std::array<ScalarField, 2> u_h;
    double diff_L2 = 0.0;         // ||A - A~||_{L2(O)}
    double dist_L2 = 0.0;         // ||dist(A, SO(2))||_{L2(O)}
    double dist_tilde_L2 = 0.0;   // ||dist(A~, SO(2))||_{L2(O)}
    double C_hat = 0.0;           // diff_L2 / dist_L2 (0 when both vanish)
    double max_laplacian = 0.0;   // max |Lap5 A~_ij| over nodes whose 3 x 3 block is interior
};

// u~ is the discrete harmonic extension of u from the boundary of O.  Throws
// std::invalid_argument when |A| (Frobenius) exceeds M_bound somewhere or the discrete curl
// exceeds curl_tol at an interior node of O; SolverError from the solves.
HarmonicCompetitor harmonic_competitor(const MatrixField& A, const RegionMask& O,
                                       double M_bound = std::numeric_limits<double>::infinity(),
                                       double curl_tol = std::numeric_limits<double>::infinity());

// |int_O det A - int_O det A_h|, midpoint rule on the cells with four corners in O.
double null_lagrangian_check(const MatrixField& A, const MatrixField& A_h, const RegionMask& O);

// (1 - zeta) A + zeta (A * rho), rho the normalised tensor quartic bump of half-width lambda eps
// and zeta = clamp((2 lambda eps - s) / (lambda eps), 0, 1), s = min_i (|x - c_i| - r_i).
// Throws std::invalid_argument when h > lambda eps / 8.
MatrixField mollified_competitor(const MatrixField& A, const CoreSet& S, const Params& p);

}  // namespace rsd
