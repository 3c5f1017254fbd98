#include "colabel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace colabel::geo {

namespace {

bool finite(double v) { return std::isfinite(v); }

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

double Polygon2::signed_area() const {
    const std::size_t n = vertices.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = vertices[i];
        const Vec2& q = vertices[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

bool Polygon2::is_convex_ccw(double eps) const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = vertices[i];
        const Vec2& b = vertices[(i + 1) % n];
        const Vec2& c = vertices[(i + 2) % n];
        if (cross(a, b, c) < -eps) return false;
    }
    return true;
}

OrientedBox3::OrientedBox3(double cx_, double cy_, double cz_, double l_, double w_, double h_,
                           double yaw_)
    : cx(cx_), cy(cy_), cz(cz_), l(l_), w(w_), h(h_), yaw(wrap_angle(yaw_)) {
    if (!(finite(cx) && finite(cy) && finite(cz) && finite(l) && finite(w) && finite(h) &&
          finite(yaw_))) {
        throw std::invalid_argument("OrientedBox3: non-finite field");
    }
    if (!(l > 0.0 && w > 0.0 && h > 0.0)) {
        throw std::invalid_argument("OrientedBox3: extents must be positive");
    }
}

std::array<Vec2, 4> OrientedBox3::bev_corners() const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double hl = 0.5 * l;
    const double hw = 0.5 * w;
    auto corner = [&](double dx, double dy) {
        return Vec2{cx + c * dx - s * dy, cy + s * dx + c * dy};
    };
    return {corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)};
}

Polygon2 OrientedBox3::footprint() const {
    const auto cs = bev_corners();
    return Polygon2{{cs[0], cs[1], cs[2], cs[3]}};
}

Vec3 OrientedBox3::to_local(const Vec3& p) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    return Vec3{c * dx + s * dy, -s * dx + c * dy, p.z - cz};
}

Vec2 OrientedBox3::to_local_bev(double px, double py) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double dx = px - cx;
    const double dy = py - cy;
    return Vec2{c * dx + s * dy, -s * dx + c * dy};
}

bool point_in_box(const Vec3& p, const OrientedBox3& b) {
    const Vec3 q = b.to_local(p);
    return std::abs(q.x) <= 0.5 * b.l && std::abs(q.y) <= 0.5 * b.w && std::abs(q.z) <= 0.5 * b.h;
}

bool point_in_footprint(double px, double py, const OrientedBox3& b) {
    const Vec2 q = b.to_local_bev(px, py);
    return std::abs(q.x) <= 0.5 * b.l && std::abs(q.y) <= 0.5 * b.w;
}

OrientedBox3 scale_box(const OrientedBox3& b, double factor) {
    if (!(factor > -1.0)) {
        throw std::invalid_argument("scale_box: factor must be > -1");
    }
    return OrientedBox3(b.cx, b.cy, b.cz, b.l * (1.0 + factor), b.w * (1.0 + factor), b.h, b.yaw);
}

std::optional<Polygon2> convex_hull_2d(const std::vector<Vec2>& points) {
    std::vector<Vec2> pts = points;
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return std::nullopt;

    // Monotone chain; strict turns only, so collinear edge-interior points
    // are not hull vertices.
    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= kEdgeEps) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= kEdgeEps) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);  // last point repeats the first
    if (hull.size() < 3) return std::nullopt;
    return Polygon2{std::move(hull)};
}

namespace {

// Sutherland-Hodgman clip of a convex CCW polygon by the half-plane to the
// left of edge (a, b); boundary points are kept.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
    std::vector<Vec2> out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 4);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double dp = cross(a, b, p);
        const double dq = cross(a, b, q);
        const bool p_in = dp >= -kEdgeEps;
        const bool q_in = dq >= -kEdgeEps;
        if (p_in) out.push_back(p);
        if (p_in != q_in) {
            const double t = dp / (dp - dq);
            out.push_back(Vec2{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    return out;
}

double ring_area(const std::vector<Vec2>& ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

double bev_intersection_area(const OrientedBox3& a, const OrientedBox3& b) {
    const auto ca = a.bev_corners();
    const auto cb = b.bev_corners();
    std::vector<Vec2> poly(ca.begin(), ca.end());
    for (int i = 0; i < 4; ++i) {
        poly = clip_half_plane(poly, cb[i], cb[(i + 1) % 4]);
        if (poly.empty()) return 0.0;
    }
    return std::max(0.0, ring_area(poly));
}

}  // namespace

double bev_iou(const OrientedBox3& a, const OrientedBox3& b) {
    const double inter = bev_intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    const double uni = a.bev_area() + b.bev_area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const OrientedBox3& a, const OrientedBox3& b) {
    const double dz = std::min(a.z_hi(), b.z_hi()) - std::max(a.z_lo(), b.z_lo());
    if (dz <= 0.0) return 0.0;
    const double inter = bev_intersection_area(a, b) * dz;
    if (inter <= 0.0) return 0.0;
    const double uni = a.volume() + b.volume() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace colabel::geo
