#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "colabel/geometry.hpp"
#include "colabel/rng.hpp"

namespace colabel::scene {

using geo::OrientedBox3;
using geo::PointCloud;

/// Scene extent in meters: {x_min, x_max, y_min, y_max}.
using Extent = std::array<double, 4>;

struct SceneConfig {
    Extent extent{-40.0, 40.0, -40.0, 40.0};
    std::size_t num_agents = 3;   // vehicles that carry a sensor (>= 2)
    std::size_t num_objects = 8;  // sensorless vehicles
    double density = 3000.0;      // expected points = density * face_area / range^2
    double sensor_height = 0.4;   // sensor sits this far above the agent's roof
    double azimuth_bin = 1e-3;    // radians per occlusion bin
    double placement_margin = 2.5;      // minimum BEV gap between placed boxes
    std::size_t max_place_attempts = 1000;  // per box, before giving up
    double ground_density = 0.0;  // points per m^2 of free ground (0 = off)
    // Surface samples are pulled this far toward the box interior so that
    // containment tests hold despite roundoff; raise it (e.g. to 1e-5) when
    // clouds will round-trip through float32 storage.
    double surface_inset = 5e-10;
    // vehicle size priors (uniform)
    double len_lo = 3.8, len_hi = 5.2;
    double wid_lo = 1.7, wid_hi = 2.1;
    double hgt_lo = 1.4, hgt_hi = 1.8;
};

struct AgentPose {
    OrientedBox3 box;  // ego-shape at ego-pose, shared with the fleet
    int agent_id = 0;  // unique within the frame; 0 is the ego view
};

/// One multi-view frame. Clouds are kept per view and never merged; each
/// cloud is in the world frame as reconstructed from that agent's believed
/// pose (i.e., after any localization error has been applied).
struct SceneFrame {
    std::uint64_t frame_id = 0;
    Extent extent{};
    std::vector<AgentPose> agents;
    std::vector<PointCloud> clouds;      // one per agent, same order
    std::vector<OrientedBox3> gt_boxes;  // objects first, then agents
    std::vector<int> gt_agent_id;        // -1 for plain objects, else agent id
    // Per cloud: points [0, object_point_count) lie on box surfaces; any
    // ground points are appended after that boundary.
    std::vector<std::size_t> object_point_count;
    // Per agent: the (dx, dy, dyaw) pose error applied to its cloud; zeros
    // for clean frames and always zeros for the ego view.
    std::vector<std::array<double, 3>> pose_errors;
};

struct NoiseModel {
    double sigma_xy = 0.0;   // std of the per-agent (x, y) error, meters
    double sigma_yaw = 0.0;  // std of the per-agent heading error, radians
    std::uint64_t seed = 0;
};

/// Generates one frame: places non-overlapping boxes, then renders each
/// agent's view with 1/range^2 surface sampling and azimuth z-buffer
/// occlusion. Bit-deterministic in (cfg, seed, frame_id). Throws
/// std::runtime_error when boxes cannot be placed within
/// cfg.max_place_attempts.
SceneFrame generate_frame(const SceneConfig& cfg, std::uint64_t seed, std::uint64_t frame_id = 0);

/// Renders one agent's view over the frame's boxes (used internally by
/// generate_frame; exposed for tests): surface points of every face visible
/// from the sensor, thinned by azimuth z-buffer occlusion. Points of the
/// agent's own box (boxes[self_box_index]) are excluded. No ground points.
PointCloud render_view(const SceneConfig& cfg, const std::vector<OrientedBox3>& boxes,
                       std::size_t self_box_index, const OrientedBox3& agent_box,
                       rng::Xoshiro256pp& rng);

/// Applies a per-agent rigid pose error to every non-ego cloud (rotation
/// about the agent position, then translation). Ground truth and stored
/// agent poses are untouched; the errors are recorded in pose_errors.
/// sigma 0 leaves the frame bit-identical.
SceneFrame apply_localization_noise(const SceneFrame& frame, const NoiseModel& noise);

/// Generates frames 0..n-1 from one master seed, in parallel; the result is
/// identical to calling generate_frame sequentially.
std::vector<SceneFrame> generate_corpus(const SceneConfig& cfg, std::size_t num_frames,
                                        std::uint64_t seed);

}  // namespace colabel::scene
