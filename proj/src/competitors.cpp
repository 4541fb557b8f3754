#include "rsd/competitors.hpp"

#include <fftw3.h>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <string>

namespace rsd {

bool RegionMask::interior(int i, int j) const {
    const int n = grid.n;
    if (i <= 0 || j <= 0 || i >= n - 1 || j >= n - 1) return false;
    return at(i, j) && at(i - 1, j) && at(i + 1, j) && at(i, j - 1) && at(i, j + 1);
}

std::size_t RegionMask::count() const { return static_cast<std::size_t>(std::count(in.begin(), in.end(), 1)); }

void RegionMask::validate() const {
    const int n = grid.n;
    if (in.size() != grid.size()) throw std::invalid_argument("RegionMask: size does not match the grid");
    int start = -1, interiors = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (at(i, j) && start < 0) start = static_cast<int>(grid.index(i, j));
            interiors += interior(i, j);
        }
    if (start < 0) throw std::invalid_argument("RegionMask: empty");
    if (interiors == 0) throw std::invalid_argument("RegionMask: no interior node");
    std::vector<char> seen(in.size(), 0);
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    std::size_t reached = 0;
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        ++reached;
        const int i = k % n, j = k / n;
        for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
            const int a = i + di, b = j + dj;
            if (a < 0 || b < 0 || a >= n || b >= n || !at(a, b)) continue;
            const auto idx = grid.index(a, b);
            if (!seen[idx]) {
                seen[idx] = 1;
                stack.push_back(static_cast<int>(idx));
            }
        }
    }
    if (reached != count()) throw std::invalid_argument("RegionMask: not 4-connected");
}

RegionMask RegionMask::from(Grid2 g, const std::function<bool(Vec2)>& inside) {
    RegionMask m(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) m.set(i, j, inside(g.node(i, j)));
    return m;
}

ScalarField solve_dirichlet(const RegionMask& mask, const ScalarField& boundary, SolveInfo* info) {
    mask.validate();
    const Grid2& g = mask.grid;
    if (boundary.grid.n != g.n || boundary.grid.L != g.L)
        throw std::invalid_argument("solve_dirichlet: boundary field is on a different grid");
    const int n = g.n;
    std::vector<int> id(g.size(), -1);
    int m = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (mask.interior(i, j)) id[g.index(i, j)] = m++;

    Eigen::SparseMatrix<double> K(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 5);
    double lo = INFINITY, hi = -INFINITY, fixed_sum = 0.0;
    long fixed_count = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int r = id[g.index(i, j)];
            if (r < 0) continue;
            trip.emplace_back(r, r, 4.0);
            for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
                const int c = id[g.index(i + di, j + dj)];
                if (c >= 0) {
                    trip.emplace_back(r, c, -1.0);
                } else {
                    const double v = boundary.at(i + di, j + dj);
                    rhs[r] += v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    fixed_sum += v;
                    ++fixed_count;
                }
            }
        }
    K.setFromTriplets(trip.begin(), trip.end());

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(10 * n * n);
    cg.compute(K);
    const Eigen::VectorXd guess = Eigen::VectorXd::Constant(m, fixed_sum / static_cast<double>(fixed_count));
    const Eigen::VectorXd x = cg.solveWithGuess(rhs, guess);
    if (cg.info() != Eigen::Success)
        throw SolverError("solve_dirichlet: no convergence after " + std::to_string(cg.iterations()) +
                          " iterations, relative residual " + std::to_string(cg.error()));
    if (info) *info = {m, static_cast<int>(cg.iterations()), cg.error()};

    ScalarField out = boundary;
    for (std::size_t k = 0; k < id.size(); ++k)
        if (id[k] >= 0) out.v[k] = std::clamp(x[id[k]], lo, hi);
    return out;
}

MatrixField forward_gradient(const std::array<ScalarField, 2>& u) {
    const Grid2 g = u[0].grid;
    const int n = g.n;
    const double h = g.h();
    MatrixField A(g);
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const ScalarField& f = u[static_cast<std::size_t>(r)];
                const double dx = i + 1 < n ? f.at(i + 1, j) - f.at(i, j) : f.at(i, j) - f.at(i - 1, j);
                const double dy = j + 1 < n ? f.at(i, j + 1) - f.at(i, j) : f.at(i, j) - f.at(i, j - 1);
                Mat2& m = A.at(i, j);
                (r == 0 ? m.a00 : m.a10) = dx / h;
                (r == 0 ? m.a01 : m.a11) = dy / h;
            }
    return A;
}

std::array<ScalarField, 2> backward_divergence(const MatrixField& A) {
    const Grid2& g = A.grid;
    const int n = g.n;
    const double h = g.h();
    std::array<ScalarField, 2> d{ScalarField(g), ScalarField(g)};
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            const Mat2 &c = A.at(i, j), &w = A.at(i - 1, j), &s = A.at(i, j - 1);
            d[0].at(i, j) = (c.a00 - w.a00) / h + (c.a01 - s.a01) / h;
            d[1].at(i, j) = (c.a10 - w.a10) / h + (c.a11 - s.a11) / h;
        }
    return d;
}

namespace {

// Lap5 u = f at the interior nodes, u = 0 on the grid edge
ScalarField poisson_dst(const ScalarField& f) {
    const Grid2& g = f.grid;
    const int n = g.n, m = n - 2;
    const double h = g.h();
    ScalarField u(g);
    if (m <= 0) return u;
    std::vector<double> buf(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) buf[static_cast<std::size_t>(j) * m + i] = f.at(i + 1, j + 1);
    fftw_plan fwd = fftw_plan_r2r_2d(m, m, buf.data(), buf.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
    std::vector<double> lam(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) lam[static_cast<std::size_t>(k)] = (2.0 * std::cos(M_PI * (k + 1) / (m + 1)) - 2.0) / (h * h);
    // RODFT00 applied twice multiplies by 2 (m + 1) per dimension
    const double norm2 = 4.0 * (m + 1.0) * (m + 1.0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            buf[static_cast<std::size_t>(j) * m + i] /= (lam[static_cast<std::size_t>(i)] + lam[static_cast<std::size_t>(j)]) * norm2;
    fftw_plan inv = fftw_plan_r2r_2d(m, m, buf.data(), buf.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    fftw_execute(inv);
    fftw_destroy_plan(inv);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) u.at(i + 1, j + 1) = buf[static_cast<std::size_t>(j) * m + i];
    return u;
}

double frob(const Mat2& m) { return std::sqrt(m.a00 * m.a00 + m.a01 * m.a01 + m.a10 * m.a10 + m.a11 * m.a11); }

Mat2 sub(const Mat2& a, const Mat2& b) { return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11}; }

}  // namespace

HodgeSplit hodge_split(const MatrixField& A) {
    if (A.grid.n < 3) throw std::invalid_argument("hodge_split: grid needs n >= 3");
    const auto div = backward_divergence(A);
    HodgeSplit out{{poisson_dst(div[0]), poisson_dst(div[1])}, MatrixField(A.grid)};
    const MatrixField G = forward_gradient(out.u);
    for (std::size_t k = 0; k < A.v.size(); ++k) out.F.v[k] = sub(A.v[k], G.v[k]);
    return out;
}

MatrixField recompose(const HodgeSplit& h) {
    MatrixField A = forward_gradient(h.u);
    for (std::size_t k = 0; k < A.v.size(); ++k) {
        const Mat2 &f = h.F.v[k];
        Mat2& a = A.v[k];
        a = {f.a00 + a.a00, f.a01 + a.a01, f.a10 + a.a10, f.a11 + a.a11};
    }
    return A;
}

HarmonicCompetitor harmonic_competitor(const MatrixField& A, const RegionMask& O, double M_bound, double curl_tol) {
    const Grid2& g = A.grid;
    if (O.grid.n != g.n || O.grid.L != g.L) throw std::invalid_argument("harmonic_competitor: mask on a different grid");
    for (std::size_t k = 0; k < A.v.size(); ++k)
        if (!(frob(A.v[k]) <= M_bound)) throw std::invalid_argument("harmonic_competitor: |A| exceeds M_bound");
    const int n = g.n;
    if (std::isfinite(curl_tol)) {
        const auto c = curl_fd(A);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (O.interior(i, j) && std::max(std::abs(c[0].at(i, j)), std::abs(c[1].at(i, j))) > curl_tol)
                    throw std::invalid_argument("harmonic_competitor: curl exceeds curl_tol inside O");
    }
    const HodgeSplit hs = hodge_split(A);
    HarmonicCompetitor out;
    out.u_h = {solve_dirichlet(O, hs.u[0]), solve_dirichlet(O, hs.u[1])};
    out.field = recompose(HodgeSplit{out.u_h, hs.F});

    const double area = g.h() * g.h();
    std::vector<double> diff, dist, dist_t;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!O.at(i, j)) continue;
            const Mat2 &a = A.at(i, j), &b = out.field.at(i, j);
            const double d = frob(sub(a, b));
            diff.push_back(d * d * area);
            dist.push_back(std::pow(dist_SO2(a), 2) * area);
            dist_t.push_back(std::pow(dist_SO2(b), 2) * area);
        }
    out.diff_L2 = std::sqrt(pairwise_sum(diff));
    out.dist_L2 = std::sqrt(pairwise_sum(dist));
    out.dist_tilde_L2 = std::sqrt(pairwise_sum(dist_t));
    out.C_hat = out.diff_L2 == 0.0 ? 0.0 : out.diff_L2 / out.dist_L2;

    const double h2 = g.h() * g.h();
    auto block_interior = [&](int i, int j) {
        for (int b = -1; b <= 1; ++b)
            for (int a = -1; a <= 1; ++a)
                if (!O.interior(i + a, j + b)) return false;
        return true;
    };
    for (int j = 2; j < n - 2; ++j)
        for (int i = 2; i < n - 2; ++i) {
            if (!block_interior(i, j)) continue;
            const Mat2 c = out.field.at(i, j);
            const Mat2 e = out.field.at(i + 1, j), w = out.field.at(i - 1, j), s = out.field.at(i, j - 1),
                       t = out.field.at(i, j + 1);
            const double l00 = (e.a00 + w.a00 + s.a00 + t.a00 - 4 * c.a00) / h2;
            const double l01 = (e.a01 + w.a01 + s.a01 + t.a01 - 4 * c.a01) / h2;
            const double l10 = (e.a10 + w.a10 + s.a10 + t.a10 - 4 * c.a10) / h2;
            const double l11 = (e.a11 + w.a11 + s.a11 + t.a11 - 4 * c.a11) / h2;
            out.max_laplacian = std::max({out.max_laplacian, std::abs(l00), std::abs(l01), std::abs(l10), std::abs(l11)});
        }
    return out;
}

double null_lagrangian_check(const MatrixField& A, const MatrixField& A_h, const RegionMask& O) {
    const Grid2& g = A.grid;
    if (A_h.grid.n != g.n || O.grid.n != g.n) throw std::invalid_argument("null_lagrangian_check: grids differ");
    const int n = g.n;
    std::vector<double> terms;
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            if (!(O.at(i, j) && O.at(i + 1, j) && O.at(i, j + 1) && O.at(i + 1, j + 1))) continue;
            auto avg_det = [&](const MatrixField& F) {
                const Mat2 &a = F.at(i, j), &b = F.at(i + 1, j), &c = F.at(i, j + 1), &d = F.at(i + 1, j + 1);
                const Mat2 m{0.25 * (a.a00 + b.a00 + c.a00 + d.a00), 0.25 * (a.a01 + b.a01 + c.a01 + d.a01),
                             0.25 * (a.a10 + b.a10 + c.a10 + d.a10), 0.25 * (a.a11 + b.a11 + c.a11 + d.a11)};
                return m.a00 * m.a11 - m.a01 * m.a10;
            };
            terms.push_back((avg_det(A) - avg_det(A_h)) * g.h() * g.h());
        }
    return std::abs(pairwise_sum(terms));
}

MatrixField mollified_competitor(const MatrixField& A, const CoreSet& S, const Params& p) {
    const Grid2& g = A.grid;
    const double le = p.lambda * p.epsilon, h = g.h();
    if (!(le > 0.0)) throw std::invalid_argument("mollified_competitor: lambda eps must be positive");
    if (h > le / 8.0)
        throw std::invalid_argument("mollified_competitor: grid spacing " + std::to_string(h) + " exceeds lambda eps / 8");
    const int n = g.n;
    const int K = static_cast<int>(std::ceil(le / h));
    std::vector<double> w;
    for (int k = -K; k <= K; ++k) {
        const double t = k * h / le;
        w.push_back(std::abs(t) < 1.0 ? (1 - t * t) * (1 - t * t) : 0.0);
    }
    const double ws = pairwise_sum(w);
    for (double& x : w) x /= ws;

    MatrixField out = A;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 x = g.node(i, j);
            double s = INFINITY;
            for (const auto& b : S.balls) s = std::min(s, norm(x - b.center) - b.radius);
            const double zeta = std::clamp((2.0 * le - s) / le, 0.0, 1.0);
            if (zeta == 0.0) continue;
            Mat2 m{0, 0, 0, 0};
            for (int b = -K; b <= K; ++b) {
                const int jj = std::clamp(j + b, 0, n - 1);
                for (int a = -K; a <= K; ++a) {
                    const double wt = w[static_cast<std::size_t>(a + K)] * w[static_cast<std::size_t>(b + K)];
                    if (wt == 0.0) continue;
                    const Mat2& q = A.at(std::clamp(i + a, 0, n - 1), jj);
                    m.a00 += wt * q.a00;
                    m.a01 += wt * q.a01;
                    m.a10 += wt * q.a10;
                    m.a11 += wt * q.a11;
                }
            }
            const Mat2& a0 = A.at(i, j);
            out.at(i, j) = {(1 - zeta) * a0.a00 + zeta * m.a00, (1 - zeta) * a0.a01 + zeta * m.a01,
                            (1 - zeta) * a0.a10 + zeta * m.a10, (1 - zeta) * a0.a11 + zeta * m.a11};
        }
    return out;
}

}  // namespace rsd
