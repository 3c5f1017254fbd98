#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace colabel::geo {

constexpr double kEdgeEps = 1e-12;  // on-edge classification tolerance

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// World-frame point cloud with stable ordering.
struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Simple convex polygon: CCW vertex ring, signed area > 0 when non-degenerate.
struct Polygon2 {
    std::vector<Vec2> vertices;

    double signed_area() const;
    bool is_convex_ccw(double eps = kEdgeEps) const;
};

/// Normalizes an angle into (-pi, pi].
double wrap_angle(double a);

/// 7-DoF oriented box: center, extents (l along heading, w lateral, h
/// vertical, all > 0), yaw about the vertical axis in (-pi, pi].
struct OrientedBox3 {
    double cx = 0.0, cy = 0.0, cz = 0.0;
    double l = 1.0, w = 1.0, h = 1.0;
    double yaw = 0.0;

    OrientedBox3() = default;
    OrientedBox3(double cx, double cy, double cz, double l, double w, double h, double yaw);

    double bev_area() const { return l * w; }
    double volume() const { return l * w * h; }
    double z_lo() const { return cz - 0.5 * h; }
    double z_hi() const { return cz + 0.5 * h; }

    /// BEV footprint corners, CCW starting at (+l/2, +w/2) in the box frame.
    std::array<Vec2, 4> bev_corners() const;
    Polygon2 footprint() const;

    /// World -> box frame (translate by -center, rotate by -yaw).
    Vec3 to_local(const Vec3& p) const;
    Vec2 to_local_bev(double px, double py) const;
};

/// Closed containment test: boundary points count as inside.
bool point_in_box(const Vec3& p, const OrientedBox3& b);

/// BEV-only containment against the box footprint (z ignored), closed.
bool point_in_footprint(double px, double py, const OrientedBox3& b);

/// Returns a copy with w and l multiplied by (1 + factor); center, h and yaw
/// are unchanged. Throws std::invalid_argument for factor <= -1.
OrientedBox3 scale_box(const OrientedBox3& b, double factor);

/// Strict 2D convex hull (extreme points only, duplicates removed), CCW.
/// Returns nullopt when the input has fewer than 3 distinct non-collinear
/// points.
std::optional<Polygon2> convex_hull_2d(const std::vector<Vec2>& points);

/// Rotated-rectangle IoU in the BEV plane, exact polygon clipping.
double bev_iou(const OrientedBox3& a, const OrientedBox3& b);

/// Volumetric IoU: BEV intersection area times vertical overlap.
double iou_3d(const OrientedBox3& a, const OrientedBox3& b);

}  // namespace colabel::geo
