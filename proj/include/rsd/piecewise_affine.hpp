#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rsd/field_core.hpp"
#include "rsd/geometry.hpp"

namespace rsd {

struct AffinePiece {
    std::array<Vec2, 3> x;  // domain vertices, counter-clockwise
    std::array<Vec2, 3> y;  // images of the vertices
    Mat2 grad;
    Vec2 offset;
    int level = -1;  // dyadic ring index, 0 = core square, -1 = outside the strip
    int tile = -1;

    double area() const { return 0.5 * cross(x[1] - x[0], x[2] - x[0]); }
    Vec2 eval(Vec2 p) const { return grad * p + offset; }
};

// Triangulated map with an affine map per triangle.  Triangles may carry different
// values at a shared vertex (branch cuts); continuity is checked separately.
class PiecewiseAffineMap {
public:
    // Throws std::invalid_argument on a degenerate triangle.  Orientation is normalized.
    void add(Vec2 x0, Vec2 x1, Vec2 x2, Vec2 y0, Vec2 y1, Vec2 y2, int level = -1, int tile = -1);
    void add(const AffinePiece& p) { add(p.x[0], p.x[1], p.x[2], p.y[0], p.y[1], p.y[2], p.level, p.tile); }

    // Builds the bucket index; call after the last add().
    void finalize();

    const std::vector<AffinePiece>& pieces() const { return pieces_; }
    std::size_t size() const { return pieces_.size(); }

    // Index of the first triangle containing p (closed triangles), or -1.
    int locate(Vec2 p) const;
    Vec2 eval(Vec2 p) const;
    Mat2 gradient(Vec2 p) const;

    // Max over edges shared by two triangles of |(G1 - G2) t|; pieces at `skip_level` are ignored.
    double max_tangential_jump(int skip_level = 0) const;

    // Every piece's image triangle becomes a domain triangle, with the images given by `values`.
    static PiecewiseAffineMap over_images(const PiecewiseAffineMap& domain_map,
                                          const PiecewiseAffineMap& values);

private:
    std::vector<AffinePiece> pieces_;
    double xmin_ = 0, ymin_ = 0, xmax_ = 0, ymax_ = 0;
    int nb_ = 0;
    double bw_ = 1, bh_ = 1;
    std::vector<std::vector<int>> buckets_;
};

// Gradient of the map sampled at every node; nodes outside all triangles get `outside`.
MatrixField sample_gradient(const PiecewiseAffineMap& map, Grid2 grid, Mat2 outside = Mat2::identity());

}  // namespace rsd
