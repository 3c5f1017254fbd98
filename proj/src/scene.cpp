#include "colabel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <vector>

#include "colabel/rng.hpp"

namespace colabel::scene {

using geo::Vec2;
using geo::Vec3;
using rng::Xoshiro256pp;

namespace {

OrientedBox3 inflate(const OrientedBox3& b, double margin) {
    return OrientedBox3(b.cx, b.cy, b.cz, b.l + 2.0 * margin, b.w + 2.0 * margin, b.h, b.yaw);
}

OrientedBox3 sample_vehicle(const SceneConfig& cfg, Xoshiro256pp& rng) {
    const double l = rng.uniform(cfg.len_lo, cfg.len_hi);
    const double w = rng.uniform(cfg.wid_lo, cfg.wid_hi);
    const double h = rng.uniform(cfg.hgt_lo, cfg.hgt_hi);
    const double half_diag = 0.5 * std::hypot(l, w);
    const double x = rng.uniform(cfg.extent[0] + half_diag, cfg.extent[1] - half_diag);
    const double y = rng.uniform(cfg.extent[2] + half_diag, cfg.extent[3] - half_diag);
    const double yaw = rng.uniform(-M_PI, M_PI);
    return OrientedBox3(x, y, 0.5 * h, l, w, h, yaw);  // resting on the ground plane
}

/// One box face: center, outward normal, and the two in-plane axes scaled to
/// the full face extents (all in the box's local frame).
struct Face {
    Vec3 center, normal, u_axis, v_axis;
    double area;
};

std::array<Face, 5> box_faces(const OrientedBox3& b) {
    const double hl = 0.5 * b.l, hw = 0.5 * b.w, hh = 0.5 * b.h;
    return {{
        {{hl, 0, 0}, {1, 0, 0}, {0, b.w, 0}, {0, 0, b.h}, b.w * b.h},    // +x side
        {{-hl, 0, 0}, {-1, 0, 0}, {0, b.w, 0}, {0, 0, b.h}, b.w * b.h},  // -x side
        {{0, hw, 0}, {0, 1, 0}, {b.l, 0, 0}, {0, 0, b.h}, b.l * b.h},    // +y side
        {{0, -hw, 0}, {0, -1, 0}, {b.l, 0, 0}, {0, 0, b.h}, b.l * b.h},  // -y side
        {{0, 0, hh}, {0, 0, 1}, {b.l, 0, 0}, {0, b.w, 0}, b.l * b.w},    // top
    }};
}

Vec3 local_to_world(const OrientedBox3& b, const Vec3& p, double c, double s) {
    return Vec3{b.cx + c * p.x - s * p.y, b.cy + s * p.x + c * p.y, b.cz + p.z};
}

Vec3 rotate_z(const Vec3& v, double c, double s) {
    return Vec3{c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

void validate(const SceneConfig& cfg) {
    if (cfg.num_agents < 2) throw std::invalid_argument("scene: need at least 2 agents");
    if (!(cfg.extent[1] > cfg.extent[0] && cfg.extent[3] > cfg.extent[2])) {
        throw std::invalid_argument("scene: empty extent");
    }
    if (!(cfg.density > 0.0)) throw std::invalid_argument("scene: density must be positive");
    if (!(cfg.azimuth_bin > 0.0)) throw std::invalid_argument("scene: azimuth_bin must be positive");
    if (!(cfg.surface_inset >= 0.0)) {
        throw std::invalid_argument("scene: surface_inset must be non-negative");
    }
}

}  // namespace

PointCloud render_view(const SceneConfig& cfg, const std::vector<OrientedBox3>& boxes,
                       std::size_t self_box_index, const OrientedBox3& agent_box,
                       Xoshiro256pp& rng) {
    const double sx = agent_box.cx;
    const double sy = agent_box.cy;
    const double sz = agent_box.z_hi() + cfg.sensor_height;

    struct Candidate {
        Vec3 p;
        double range;
        int bin;
        int box_idx;
    };
    std::vector<Candidate> cands;
    const int nbins = static_cast<int>(std::ceil(2.0 * M_PI / cfg.azimuth_bin));

    for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
        if (bi == self_box_index) continue;
        const OrientedBox3& b = boxes[bi];
        const double c = std::cos(b.yaw);
        const double s = std::sin(b.yaw);
        for (const Face& face : box_faces(b)) {
            const Vec3 fc = local_to_world(b, face.center, c, s);
            const Vec3 n = rotate_z(face.normal, c, s);
            const Vec3 to_sensor{sx - fc.x, sy - fc.y, sz - fc.z};
            if (n.x * to_sensor.x + n.y * to_sensor.y + n.z * to_sensor.z <= 0.0) continue;
            const double range2 =
                to_sensor.x * to_sensor.x + to_sensor.y * to_sensor.y + to_sensor.z * to_sensor.z;
            const std::uint64_t count = rng.poisson(cfg.density * face.area / range2);
            for (std::uint64_t k = 0; k < count; ++k) {
                const double u = rng.uniform(-0.5, 0.5);
                const double v = rng.uniform(-0.5, 0.5);
                const Vec3 local{face.center.x + u * face.u_axis.x + v * face.v_axis.x,
                                 face.center.y + u * face.u_axis.y + v * face.v_axis.y,
                                 face.center.z + u * face.u_axis.z + v * face.v_axis.z};
                Vec3 p = local_to_world(b, local, c, s);
                p.x -= cfg.surface_inset * n.x;
                p.y -= cfg.surface_inset * n.y;
                p.z -= cfg.surface_inset * n.z;
                const double dx = p.x - sx, dy = p.y - sy, dz = p.z - sz;
                const double range = std::sqrt(dx * dx + dy * dy + dz * dz);
                const double az = std::atan2(dy, dx);
                const int bin = std::clamp(
                    static_cast<int>((az + M_PI) / cfg.azimuth_bin), 0, nbins - 1);
                cands.push_back(Candidate{p, range, bin, static_cast<int>(bi)});
            }
        }
    }

    // Azimuth z-buffer: in each bin only the box owning the nearest point
    // survives; a box never occludes its own faces.
    std::vector<double> best_range(nbins, 1e300);
    std::vector<int> best_box(nbins, -1);
    for (const Candidate& cand : cands) {
        if (cand.range < best_range[cand.bin]) {
            best_range[cand.bin] = cand.range;
            best_box[cand.bin] = cand.box_idx;
        }
    }
    PointCloud out;
    out.points.reserve(cands.size());
    for (const Candidate& cand : cands) {
        if (best_box[cand.bin] == cand.box_idx) out.points.push_back(cand.p);
    }
    return out;
}

SceneFrame generate_frame(const SceneConfig& cfg, std::uint64_t seed, std::uint64_t frame_id) {
    validate(cfg);
    SceneFrame f;
    f.frame_id = frame_id;
    f.extent = cfg.extent;

    Xoshiro256pp place_rng = Xoshiro256pp::derive(seed, {frame_id, rng::streams::kPlacement});
    const std::size_t total = cfg.num_objects + cfg.num_agents;
    for (std::size_t i = 0; i < total; ++i) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < cfg.max_place_attempts; ++attempt) {
            const OrientedBox3 cand = sample_vehicle(cfg, place_rng);
            const OrientedBox3 cand_inf = inflate(cand, 0.5 * cfg.placement_margin);
            bool collides = false;
            for (const OrientedBox3& other : f.gt_boxes) {
                if (geo::bev_iou(cand_inf, inflate(other, 0.5 * cfg.placement_margin)) > 0.0) {
                    collides = true;
                    break;
                }
            }
            if (!collides) {
                f.gt_boxes.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw std::runtime_error("generate_frame: box placement failed; extent too crowded");
        }
    }

    f.gt_agent_id.assign(cfg.num_objects, -1);
    for (std::size_t a = 0; a < cfg.num_agents; ++a) {
        f.gt_agent_id.push_back(static_cast<int>(a));
        f.agents.push_back(AgentPose{f.gt_boxes[cfg.num_objects + a], static_cast<int>(a)});
    }

    for (std::size_t a = 0; a < cfg.num_agents; ++a) {
        Xoshiro256pp cloud_rng = Xoshiro256pp::derive(
            seed, {frame_id, static_cast<std::uint64_t>(a), rng::streams::kCloud});
        PointCloud cloud =
            render_view(cfg, f.gt_boxes, cfg.num_objects + a, f.agents[a].box, cloud_rng);
        f.object_point_count.push_back(cloud.size());
        if (cfg.ground_density > 0.0) {
            const double area =
                (cfg.extent[1] - cfg.extent[0]) * (cfg.extent[3] - cfg.extent[2]);
            const std::uint64_t count = cloud_rng.poisson(cfg.ground_density * area);
            for (std::uint64_t k = 0; k < count; ++k) {
                const double x = cloud_rng.uniform(cfg.extent[0], cfg.extent[1]);
                const double y = cloud_rng.uniform(cfg.extent[2], cfg.extent[3]);
                bool inside = false;
                for (const OrientedBox3& b : f.gt_boxes) {
                    if (geo::point_in_footprint(x, y, b)) {
                        inside = true;
                        break;
                    }
                }
                if (!inside) cloud.points.push_back(Vec3{x, y, 0.0});
            }
        }
        f.clouds.push_back(std::move(cloud));
        f.pose_errors.push_back({0.0, 0.0, 0.0});
    }
    return f;
}

SceneFrame apply_localization_noise(const SceneFrame& frame, const NoiseModel& noise) {
    SceneFrame out = frame;
    for (std::size_t i = 0; i < out.agents.size(); ++i) {
        const AgentPose& ap = out.agents[i];
        if (ap.agent_id == 0) continue;  // ego view is the reference frame
        Xoshiro256pp nrng = Xoshiro256pp::derive(
            noise.seed,
            {frame.frame_id, static_cast<std::uint64_t>(ap.agent_id), rng::streams::kNoise});
        const double dx = nrng.gaussian(0.0, noise.sigma_xy);
        const double dy = nrng.gaussian(0.0, noise.sigma_xy);
        const double dyaw = nrng.gaussian(0.0, noise.sigma_yaw);
        out.pose_errors[i] = {dx, dy, dyaw};
        if (dx == 0.0 && dy == 0.0 && dyaw == 0.0) continue;  // keep zero-noise bit-exact
        const double c = std::cos(dyaw);
        const double s = std::sin(dyaw);
        const double ax = ap.box.cx;
        const double ay = ap.box.cy;
        for (Vec3& p : out.clouds[i].points) {
            const double rx = p.x - ax;
            const double ry = p.y - ay;
            p.x = ax + c * rx - s * ry + dx;
            p.y = ay + s * rx + c * ry + dy;
        }
    }
    return out;
}

std::vector<SceneFrame> generate_corpus(const SceneConfig& cfg, std::size_t num_frames,
                                        std::uint64_t seed) {
    std::vector<SceneFrame> frames(num_frames);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(num_frames); ++i) {
        try {
            frames[i] = generate_frame(cfg, seed, static_cast<std::uint64_t>(i));
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return frames;
}

}  // namespace colabel::scene
