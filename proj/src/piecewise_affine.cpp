#include "rsd/piecewise_affine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace rsd {

void PiecewiseAffineMap::add(Vec2 x0, Vec2 x1, Vec2 x2, Vec2 y0, Vec2 y1, Vec2 y2, int level, int tile) {
    double a2 = cross(x1 - x0, x2 - x0);
    if (a2 < 0.0) {
        std::swap(x1, x2);
        std::swap(y1, y2);
        a2 = -a2;
    }
    const double scale = std::max({norm(x1 - x0), norm(x2 - x0), norm(x2 - x1)});
    if (!(a2 > 1e-14 * scale * scale)) throw std::invalid_argument("piecewise affine map: degenerate triangle");
    const Mat2 dx{x1.x - x0.x, x2.x - x0.x, x1.y - x0.y, x2.y - x0.y};
    const Mat2 dy{y1.x - y0.x, y2.x - y0.x, y1.y - y0.y, y2.y - y0.y};
    AffinePiece p;
    p.x = {x0, x1, x2};
    p.y = {y0, y1, y2};
    p.grad = dy * dx.inverse();
    p.offset = y0 - p.grad * x0;
    p.level = level;
    p.tile = tile;
    pieces_.push_back(p);
}

void PiecewiseAffineMap::finalize() {
    if (pieces_.empty()) return;
    xmin_ = ymin_ = INFINITY;
    xmax_ = ymax_ = -INFINITY;
    for (const auto& p : pieces_)
        for (const auto& v : p.x) {
            xmin_ = std::min(xmin_, v.x);
            xmax_ = std::max(xmax_, v.x);
            ymin_ = std::min(ymin_, v.y);
            ymax_ = std::max(ymax_, v.y);
        }
    nb_ = std::clamp(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pieces_.size())))), 1, 1024);
    bw_ = (xmax_ - xmin_) / nb_;
    bh_ = (ymax_ - ymin_) / nb_;
    if (bw_ <= 0) bw_ = 1;
    if (bh_ <= 0) bh_ = 1;
    buckets_.assign(static_cast<std::size_t>(nb_) * nb_, {});
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        const auto& p = pieces_[k];
        double lx = INFINITY, hx = -INFINITY, ly = INFINITY, hy = -INFINITY;
        for (const auto& v : p.x) {
            lx = std::min(lx, v.x);
            hx = std::max(hx, v.x);
            ly = std::min(ly, v.y);
            hy = std::max(hy, v.y);
        }
        const double pad = 1e-12 * std::max(1.0, std::max(std::abs(xmax_), std::abs(ymax_)));
        const int i0 = std::clamp(static_cast<int>(std::floor((lx - pad - xmin_) / bw_)), 0, nb_ - 1);
        const int i1 = std::clamp(static_cast<int>(std::floor((hx + pad - xmin_) / bw_)), 0, nb_ - 1);
        const int j0 = std::clamp(static_cast<int>(std::floor((ly - pad - ymin_) / bh_)), 0, nb_ - 1);
        const int j1 = std::clamp(static_cast<int>(std::floor((hy + pad - ymin_) / bh_)), 0, nb_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nb_ + i].push_back(static_cast<int>(k));
    }
}

namespace {

bool contains(const AffinePiece& p, Vec2 q) {
    const double a = p.area() * 2.0;
    const double tol = -1e-12 * a;
    const double l0 = cross(p.x[1] - q, p.x[2] - q);
    const double l1 = cross(p.x[2] - q, p.x[0] - q);
    const double l2 = cross(p.x[0] - q, p.x[1] - q);
    return l0 >= tol && l1 >= tol && l2 >= tol;
}

}  // namespace

int PiecewiseAffineMap::locate(Vec2 q) const {
    if (buckets_.empty()) return -1;
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(xmax_), std::abs(ymax_)));
    if (q.x < xmin_ - pad || q.x > xmax_ + pad || q.y < ymin_ - pad || q.y > ymax_ + pad) return -1;
    const int i = std::clamp(static_cast<int>(std::floor((q.x - xmin_) / bw_)), 0, nb_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((q.y - ymin_) / bh_)), 0, nb_ - 1);
    for (int k : buckets_[static_cast<std::size_t>(j) * nb_ + i])
        if (contains(pieces_[static_cast<std::size_t>(k)], q)) return k;
    return -1;
}

Vec2 PiecewiseAffineMap::eval(Vec2 p) const {
    const int k = locate(p);
    if (k < 0) throw std::out_of_range("piecewise affine map: point outside the triangulation");
    return pieces_[static_cast<std::size_t>(k)].eval(p);
}

Mat2 PiecewiseAffineMap::gradient(Vec2 p) const {
    const int k = locate(p);
    if (k < 0) throw std::out_of_range("piecewise affine map: point outside the triangulation");
    return pieces_[static_cast<std::size_t>(k)].grad;
}

double PiecewiseAffineMap::max_tangential_jump(int skip_level) const {
    // quantized endpoint keys; vertices computed along different paths may differ by rounding
    double scale = 0.0;
    for (const auto& p : pieces_)
        for (const auto& v : p.x) scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
    const double q = 1e-10 * std::max(scale, 1e-300);
    auto key = [q](Vec2 v) { return std::make_pair(std::llround(v.x / q), std::llround(v.y / q)); };
    using Key = std::pair<long long, long long>;
    struct Edge {
        Vec2 a, b;
        std::vector<int> ids;
    };
    std::map<std::pair<Key, Key>, Edge> edges;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        const auto& p = pieces_[k];
        if (p.level == skip_level) continue;
        for (int e = 0; e < 3; ++e) {
            const Vec2 xa = p.x[static_cast<std::size_t>(e)];
            const Vec2 xb = p.x[static_cast<std::size_t>((e + 1) % 3)];
            Key a = key(xa), b = key(xb);
            if (b < a) std::swap(a, b);
            auto& edge = edges[{a, b}];
            if (edge.ids.empty()) {
                edge.a = xa;
                edge.b = xb;
            }
            edge.ids.push_back(static_cast<int>(k));
        }
    }
    double worst = 0.0;
    for (const auto& [ek, edge] : edges) {
        const auto& ids = edge.ids;
        if (ids.size() < 2) continue;
        const Vec2 t = (edge.b - edge.a) / norm(edge.b - edge.a);
        for (std::size_t s = 0; s + 1 < ids.size(); ++s) {
            const auto& p1 = pieces_[static_cast<std::size_t>(ids[s])];
            const auto& p2 = pieces_[static_cast<std::size_t>(ids[s + 1])];
            worst = std::max(worst, norm((p1.grad - p2.grad) * t));
        }
    }
    return worst;
}

PiecewiseAffineMap PiecewiseAffineMap::over_images(const PiecewiseAffineMap& domain_map,
                                                   const PiecewiseAffineMap& values) {
    if (domain_map.size() != values.size())
        throw std::invalid_argument("over_images: triangulations differ in size");
    PiecewiseAffineMap out;
    for (std::size_t k = 0; k < domain_map.size(); ++k) {
        const auto& d = domain_map.pieces_[k];
        const auto& v = values.pieces_[k];
        out.add(d.y[0], d.y[1], d.y[2], v.y[0], v.y[1], v.y[2], d.level, d.tile);
    }
    out.finalize();
    return out;
}

MatrixField sample_gradient(const PiecewiseAffineMap& map, Grid2 grid, Mat2 outside) {
    MatrixField f(grid);
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const int k = map.locate(grid.node(i, j));
            f.at(i, j) = k < 0 ? outside : map.pieces()[static_cast<std::size_t>(k)].grad;
        }
    return f;
}

}  // namespace rsd
