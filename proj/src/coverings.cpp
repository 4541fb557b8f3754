#include "rsd/coverings.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rsd {

namespace {

bool lex_less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

std::vector<int> lex_order(const std::vector<Vec2>& pts, const std::vector<int>& idx) {
    std::vector<int> o = idx;
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) {
        const Vec2 pa = pts[static_cast<std::size_t>(a)], pb = pts[static_cast<std::size_t>(b)];
        if (lex_less(pa, pb)) return true;
        if (lex_less(pb, pa)) return false;
        return a < b;
    });
    return o;
}

Ball enclosing(const Ball& a, const Ball& b) {
    const double d = norm(b.center - a.center);
    if (d + b.radius <= a.radius) return a;
    if (d + a.radius <= b.radius) return b;
    const double R = 0.5 * (d + a.radius + b.radius);
    return {a.center + (b.center - a.center) * ((R - a.radius) / d), R};
}

}  // namespace

double BallFamily::sum_radii() const {
    std::vector<double> r;
    r.reserve(balls.size());
    for (const auto& b : balls) r.push_back(b.radius);
    return pairwise_sum(r);
}

bool BallFamily::pairwise_disjoint(double slack) const {
    for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size(); ++j)
            if (norm(balls[i].center - balls[j].center) < balls[i].radius + balls[j].radius - slack) return false;
    return true;
}

void BallFamily::certify_disjoint() {
    for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size(); ++j)
            if (norm(balls[i].center - balls[j].center) < balls[i].radius + balls[j].radius - 1e-12)
                throw std::invalid_argument("ball family: balls " + std::to_string(i) + " and " + std::to_string(j) +
                                            " overlap");
    disjoint = true;
}

std::vector<int> vitali_select(const BallFamily& family, double dilation) {
    if (!(dilation >= 3.0)) throw std::invalid_argument("vitali_select: dilation must be >= 3");
    const auto& B = family.balls;
    std::vector<int> order(B.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const Ball &p = B[static_cast<std::size_t>(a)], &q = B[static_cast<std::size_t>(b)];
        if (p.radius != q.radius) return p.radius > q.radius;
        if (lex_less(p.center, q.center)) return true;
        if (lex_less(q.center, p.center)) return false;
        return a < b;
    });
    std::vector<int> chosen;
    for (int i : order) {
        const Ball& b = B[static_cast<std::size_t>(i)];
        bool free = true;
        for (int c : chosen) {
            const Ball& o = B[static_cast<std::size_t>(c)];
            if (norm(b.center - o.center) < b.radius + o.radius) {
                free = false;
                break;
            }
        }
        if (free) chosen.push_back(i);
    }
    return chosen;
}

double rho_bar(const WeightedPointMeasure& mu, Vec2 x, double delta0) {
    if (!(delta0 > 0.0)) throw std::invalid_argument("rho_bar: delta0 must be positive");
    // atoms at distance d sit in the annulus exactly for rho in (d/2, d]
    std::vector<std::pair<double, double>> dw;
    for (const auto& a : mu.atoms) {
        const double d = norm(a.point - x);
        if (d > 0.0 && a.weight > 0.0) dw.push_back({d, a.weight});
    }
    if (dw.empty()) return 0.0;
    std::sort(dw.begin(), dw.end());
    const std::size_t n = dw.size();
    std::vector<double> tail(n + 1, 0.0);  // tail[i] = weight of atoms i..n-1
    for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + dw[i].second;
    auto weight_at_least = [&](double c) {
        const auto it = std::lower_bound(dw.begin(), dw.end(), c, [](const auto& p, double v) { return p.first < v; });
        return tail[static_cast<std::size_t>(it - dw.begin())];
    };
    std::vector<double> cuts;
    cuts.reserve(2 * n);
    for (const auto& [d, w] : dw) {
        cuts.push_back(0.5 * d);
        cuts.push_back(d);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double best = 0.0, prev = 0.0;
    for (double c : cuts) {
        // constant on (prev, c]
        const double m = std::max(0.0, weight_at_least(c) - weight_at_least(2.0 * c));
        const double lim = m / delta0;
        if (m > 0.0 && lim > prev) best = std::max(best, std::min(c, lim));
        prev = c;
    }
    return best;
}

Deg2Selection make_deg2_disjoint(const std::vector<Vec2>& points, const std::vector<int>& J, double R, double delta,
                                 double M, int max_level) {
    if (!(M > 34.0)) throw std::invalid_argument("make_deg2_disjoint: M must exceed 34");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("make_deg2_disjoint: delta must lie in (0, 1)");
    if (!(R > 0.0)) throw std::invalid_argument("make_deg2_disjoint: R must be positive");
    const double beta = 0.5 * M - 2.0;
    Deg2Selection out;
    out.r.assign(points.size(), 0.0);
    std::vector<int> level(points.size(), -1);
    for (int j : J) {
        if (j < 0 || static_cast<std::size_t>(j) >= points.size())
            throw std::invalid_argument("make_deg2_disjoint: index " + std::to_string(j) + " out of range");
        std::vector<double> d;
        d.reserve(points.size());
        for (const auto& q : points) d.push_back(norm(q - points[static_cast<std::size_t>(j)]));
        std::sort(d.begin(), d.end());
        double rho = R;
        for (int k = 0; k <= max_level; ++k, rho *= delta) {
            // empty annulus: no distance in [rho, beta rho)
            const auto it = std::lower_bound(d.begin(), d.end(), rho);
            if (it == d.end() || *it >= beta * rho) {
                out.r[static_cast<std::size_t>(j)] = rho;
                level[static_cast<std::size_t>(j)] = k;
                break;
            }
        }
        if (level[static_cast<std::size_t>(j)] < 0)
            throw std::invalid_argument("make_deg2_disjoint: point " + std::to_string(j) +
                                        " has no empty annulus up to level " + std::to_string(max_level));
    }
    const auto ordered = lex_order(points, J);
    for (int k = 0; k <= max_level; ++k) {
        for (int j : ordered) {
            if (level[static_cast<std::size_t>(j)] != k) continue;
            const Vec2 xj = points[static_cast<std::size_t>(j)];
            const double rj = out.r[static_cast<std::size_t>(j)];
            bool ok = true;
            for (int i : out.chosen) {
                if (i == j) {
                    ok = false;
                    break;
                }
                if (norm(points[static_cast<std::size_t>(i)] - xj) < 0.5 * beta * (out.r[static_cast<std::size_t>(i)] + rj)) {
                    ok = false;
                    break;
                }
            }
            if (ok) out.chosen.push_back(j);
        }
    }
    return out;
}

SelectionResult find_nice_balls(const BallFamily& family, const WeightedPointMeasure& mu, double R, Vec2 centre) {
    if (!(R > 0.0)) throw std::invalid_argument("find_nice_balls: R must be positive");
    const auto& B = family.balls;
    for (std::size_t i = 0; i < B.size(); ++i)
        if (!(norm(B[i].center - centre) + 30.0 * B[i].radius < R))
            throw std::invalid_argument("find_nice_balls: ball " + std::to_string(i) +
                                        " violates B(x, 30 rho) inside B(0, R)");
    for (std::size_t a = 0; a < mu.atoms.size(); ++a) {
        if (mu.atoms[a].weight <= 0.0) continue;
        bool in = false;
        for (const auto& b : B)
            if (norm(mu.atoms[a].point - b.center) <= b.radius) {
                in = true;
                break;
            }
        if (!in) throw std::invalid_argument("find_nice_balls: atom " + std::to_string(a) + " lies outside every ball");
    }

    SelectionResult res;
    const double total = mu.mass_in_ball(centre, R);

    // shell index: R(1 - 2^-k) <= |x| < R(1 - 2^-(k+1))
    std::vector<int> shell(B.size());
    int kmax = -1;
    for (std::size_t i = 0; i < B.size(); ++i) {
        const double t = 1.0 - norm(B[i].center - centre) / R;  // in (0, 1]
        int k = static_cast<int>(std::floor(-std::log2(t)));
        while (k > 0 && norm(B[i].center - centre) < R * (1.0 - std::ldexp(1.0, -k))) --k;
        while (norm(B[i].center - centre) >= R * (1.0 - std::ldexp(1.0, -(k + 1)))) ++k;
        shell[i] = k;
        kmax = std::max(kmax, k);
    }
    if (kmax < 0) return res;

    std::vector<Vec2> pts;
    for (const auto& b : B) pts.push_back(b.center);

    struct Shell {
        double r = 0.0;
        std::vector<std::vector<int>> classes;
        std::vector<double> class_mass;  // mu of the union of the r-balls of the class
        double mass = 0.0;               // mu of the union of the r-balls of I_k
    };
    std::vector<Shell> shells(static_cast<std::size_t>(kmax + 1));

    auto union_mass = [&](const std::vector<int>& idx, double r) {
        std::vector<double> w;
        for (const auto& a : mu.atoms) {
            if (a.weight <= 0.0) continue;
            for (int i : idx)
                if (norm(a.point - pts[static_cast<std::size_t>(i)]) < r) {
                    w.push_back(a.weight);
                    break;
                }
        }
        return pairwise_sum(w);
    };

    for (int k = 0; k <= kmax; ++k) {
        Shell& s = shells[static_cast<std::size_t>(k)];
        s.r = std::ldexp(R, -k) / 10.0;
        std::vector<int> members;
        for (std::size_t i = 0; i < B.size(); ++i)
            if (shell[i] == k) members.push_back(static_cast<int>(i));
        std::vector<int> Ik;
        for (int i : lex_order(pts, members)) {
            bool ok = true;
            for (int j : Ik)
                if (norm(pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]) < s.r / 3.0) {
                    ok = false;
                    break;
                }
            if (ok) Ik.push_back(i);
        }
        // greedy colouring: same colour only at distance >= 4 r
        std::vector<int> colour(Ik.size(), -1);
        int ncol = 0;
        for (std::size_t a = 0; a < Ik.size(); ++a) {
            std::vector<char> used(static_cast<std::size_t>(ncol) + 1, 0);
            for (std::size_t b = 0; b < a; ++b)
                if (norm(pts[static_cast<std::size_t>(Ik[a])] - pts[static_cast<std::size_t>(Ik[b])]) < 4.0 * s.r)
                    used[static_cast<std::size_t>(colour[b])] = 1;
            int c = 0;
            while (used[static_cast<std::size_t>(c)]) ++c;
            colour[a] = c;
            ncol = std::max(ncol, c + 1);
        }
        res.colors = std::max(res.colors, ncol);
        s.classes.assign(static_cast<std::size_t>(ncol), {});
        for (std::size_t a = 0; a < Ik.size(); ++a) s.classes[static_cast<std::size_t>(colour[a])].push_back(Ik[a]);
        for (const auto& c : s.classes) s.class_mass.push_back(union_mass(c, s.r));
        s.mass = union_mass(Ik, s.r);
    }

    double even = 0.0, odd = 0.0;
    for (int k = 0; k <= kmax; ++k) (k % 2 == 0 ? even : odd) += shells[static_cast<std::size_t>(k)].mass;
    const int parity = even >= odd ? 0 : 1;

    std::vector<double> got;
    for (int k = parity; k <= kmax; k += 2) {
        const Shell& s = shells[static_cast<std::size_t>(k)];
        if (s.classes.empty()) continue;
        std::size_t best = 0;
        for (std::size_t c = 1; c < s.classes.size(); ++c)
            if (s.class_mass[c] > s.class_mass[best]) best = c;
        for (int i : s.classes[best]) {
            res.chosen.push_back(i);
            res.radius.push_back(s.r);
            got.push_back(mu.mass_in_ball(pts[static_cast<std::size_t>(i)], s.r));
        }
    }
    res.fraction = total > 0.0 ? std::min(1.0, pairwise_sum(got) / total) : 1.0;
    return res;
}

WeightedPointMeasure perimeter_measure(const BallFamily& family, int atoms_per_circle) {
    if (atoms_per_circle < 1) throw std::invalid_argument("perimeter_measure: need at least one atom per circle");
    WeightedPointMeasure m;
    for (const auto& b : family.balls) {
        const double w = 2.0 * M_PI * b.radius / atoms_per_circle;
        for (int a = 0; a < atoms_per_circle; ++a) {
            const double t = 2.0 * M_PI * (a + 0.5) / atoms_per_circle;
            m.atoms.push_back({b.center + Vec2{std::cos(t), std::sin(t)} * b.radius, w});
        }
    }
    return m;
}

BallFamily merge_balls(BallFamily family) {
    auto& B = family.balls;
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < B.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < B.size(); ++j)
                if (norm(B[i].center - B[j].center) <= B[i].radius + B[j].radius) {
                    B[i] = enclosing(B[i], B[j]);
                    B.erase(B.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                    break;
                }
    }
    std::stable_sort(B.begin(), B.end(), [](const Ball& a, const Ball& b) { return lex_less(a.center, b.center); });
    family.disjoint = true;
    return family;
}

BallStep ball_construction_step(const BallFamily& family, const WeightedPointMeasure& mu, double delta0) {
    if (!family.pairwise_disjoint()) throw std::invalid_argument("ball_construction_step: input family is not disjoint");
    if (!(delta0 > 0.0)) throw std::invalid_argument("ball_construction_step: delta0 must be positive");
    BallStep st;
    BallFamily expanded;
    std::vector<int> origin;
    for (std::size_t i = 0; i < family.balls.size(); ++i) {
        const double rb = rho_bar(mu, family.balls[i].center, delta0);
        st.rho_bar.push_back(rb);
        if (rb > 0.0) {
            expanded.balls.push_back({family.balls[i].center, 2.0 * rb});
            origin.push_back(static_cast<int>(i));
        }
    }
    for (int v : vitali_select(expanded, 3.0)) st.vitali.push_back(origin[static_cast<std::size_t>(v)]);
    std::sort(st.vitali.begin(), st.vitali.end());
    BallFamily dilated;
    for (int i : st.vitali)
        dilated.balls.push_back({family.balls[static_cast<std::size_t>(i)].center, 180.0 * st.rho_bar[static_cast<std::size_t>(i)]});
    st.next = merge_balls(dilated);
    for (const auto& d : dilated.balls) {
        int par = -1;
        for (std::size_t o = 0; o < st.next.balls.size(); ++o) {
            const Ball& b = st.next.balls[o];
            if (norm(d.center - b.center) + d.radius <= b.radius * (1.0 + 1e-12)) {
                par = static_cast<int>(o);
                break;
            }
        }
        st.parent.push_back(par);
    }
    return st;
}

namespace {

// |integral of the discrete curl over B|, node quadrature, plus the node count of B inside a second ball
struct BallCurl {
    double flux = 0.0;
    double area_in = 0.0;
};

BallCurl ball_curl(const std::array<ScalarField, 2>& curl, const Ball& b, Vec2 p, double r2) {
    const Grid2& g = curl[0].grid;
    const double h = g.h();
    const int lo_i = std::max(0, static_cast<int>(std::floor((b.center.x - b.radius + g.L) / h)));
    const int hi_i = std::min(g.n - 1, static_cast<int>(std::ceil((b.center.x + b.radius + g.L) / h)));
    const int lo_j = std::max(0, static_cast<int>(std::floor((b.center.y - b.radius + g.L) / h)));
    const int hi_j = std::min(g.n - 1, static_cast<int>(std::ceil((b.center.y + b.radius + g.L) / h)));
    std::vector<double> c0, c1;
    long in = 0;
    for (int j = lo_j; j <= hi_j; ++j)
        for (int i = lo_i; i <= hi_i; ++i) {
            const Vec2 x = g.node(i, j);
            if (norm(x - b.center) >= b.radius) continue;
            c0.push_back(curl[0].at(i, j));
            c1.push_back(curl[1].at(i, j));
            if (norm(x - p) < r2) ++in;
        }
    BallCurl r;
    r.flux = std::hypot(pairwise_sum(c0), pairwise_sum(c1)) * h * h;
    r.area_in = static_cast<double>(in) * h * h;
    return r;
}

}  // namespace

std::vector<DensityRecord> density_trace(const MatrixField& A, const CoreSet& S, const Params& params, Vec2 p, double R,
                                         double delta0, int K) {
    if (K < 1) throw std::invalid_argument("density_trace: K must be at least 1");
    const double L = A.grid.L;
    if (!(R > 0.0) || std::abs(p.x) + 3.0 * R > L || std::abs(p.y) + 3.0 * R > L)
        throw std::invalid_argument("density_trace: B(p, 3R) is not inside the domain");
    const double le = params.lambda * params.epsilon;
    const auto curl = curl_fd(A);
    const double mu_mass = build_measures(A, S, params).mu.mass_in_ball(p, 2.0 * R);

    BallFamily fam;
    for (const auto& c : S.balls)
        if (norm(c.center - p) < 2.0 * R + c.radius + le) fam.balls.push_back({c.center, c.radius + le});
    fam = merge_balls(fam);

    std::vector<DensityRecord> out;
    double n_sum = 0.0;  // sum_{l = 1}^{k-1} n_l
    for (int k = 0; k <= K; ++k) {
        DensityRecord rec;
        rec.k = k;
        rec.sum_radii = fam.sum_radii();
        // tau_k = sum_j a_j |B_j cap B(p, 2R)|, a_j = |integral of Curl over B_j| / |B_j|
        WeightedPointMeasure tau_atoms;
        std::vector<double> tau_terms;
        for (const auto& b : fam.balls) {
            const BallCurl bc = ball_curl(curl, b, p, 2.0 * R);
            const double a = bc.flux / (M_PI * b.radius * b.radius);
            tau_terms.push_back(a * bc.area_in);
            tau_atoms.atoms.push_back({b.center, bc.flux});
        }
        rec.tau_k = pairwise_sum(tau_terms);
        if (k >= 1) {
            const double denom = mu_mass + params.tau * params.epsilon * n_sum;
            rec.C_hat = denom > 0.0 ? k * rec.tau_k / denom : 0.0;
        }

        // one more step; its nice balls give n_k
        const BallStep st = ball_construction_step(fam, perimeter_measure(fam), delta0);
        for (std::size_t o = 0; o < st.next.balls.size(); ++o) {
            const Ball& X = st.next.balls[o];
            BallFamily children;
            for (std::size_t v = 0; v < st.vitali.size(); ++v)
                if (st.parent[v] == static_cast<int>(o)) {
                    const int i = st.vitali[v];
                    // shrunk so that B(x, 30 * 6 rho_bar) stays strictly inside X
                    children.balls.push_back({fam.balls[static_cast<std::size_t>(i)].center,
                                              6.0 * st.rho_bar[static_cast<std::size_t>(i)] * (1.0 - 1e-9)});
                }
            if (children.balls.empty()) continue;
            WeightedPointMeasure local;
            for (const auto& a : tau_atoms.atoms) {
                if (a.weight <= 0.0) continue;
                for (const auto& c : children.balls)
                    if (norm(a.point - c.center) <= c.radius) {
                        local.atoms.push_back(a);
                        break;
                    }
            }
            const SelectionResult nice = find_nice_balls(children, local, X.radius, X.center);
            for (const auto& b : fam.balls) {
                for (std::size_t c = 0; c < nice.chosen.size(); ++c) {
                    const Vec2 xc = children.balls[static_cast<std::size_t>(nice.chosen[c])].center;
                    const double Rc = nice.radius[c], d = norm(b.center - xc);
                    if (d - b.radius >= Rc && d + b.radius <= 2.0 * Rc) {
                        ++rec.n_k;
                        break;
                    }
                }
            }
        }
        if (k >= 1) n_sum += rec.n_k;
        out.push_back(rec);
        fam = st.next;
    }
    return out;
}

}  // namespace rsd
