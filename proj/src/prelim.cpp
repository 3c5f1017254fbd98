#include "colabel/prelim.hpp"

#include <cmath>
#include <stdexcept>

#include "colabel/rng.hpp"

namespace colabel::prelim {

using geo::OrientedBox3;
using geo::Vec2;
using rng::Xoshiro256pp;

std::string_view origin_name(LabelOrigin origin) {
    switch (origin) {
        case LabelOrigin::agent_shared: return "agent_shared";
        case LabelOrigin::surrogate_tp: return "surrogate_tp";
        case LabelOrigin::surrogate_fp: return "surrogate_fp";
        case LabelOrigin::external: return "external";
    }
    return "external";
}

std::optional<LabelOrigin> origin_from_name(std::string_view name) {
    if (name == "agent_shared") return LabelOrigin::agent_shared;
    if (name == "surrogate_tp") return LabelOrigin::surrogate_tp;
    if (name == "surrogate_fp") return LabelOrigin::surrogate_fp;
    if (name == "external") return LabelOrigin::external;
    return std::nullopt;
}

std::vector<ScoredLabel> agent_labels(const scene::SceneFrame& frame) {
    std::vector<ScoredLabel> out;
    out.reserve(frame.agents.size());
    for (const scene::AgentPose& a : frame.agents) {
        out.push_back(ScoredLabel{a.box, 1.0, LabelOrigin::agent_shared});
    }
    return out;
}

namespace {

/// The object as a view with pose error (dx, dy, dyaw) perceives it: the
/// same rigid transform that displaced the view's cloud, applied to the box.
OrientedBox3 as_seen_by(const OrientedBox3& gt, const std::array<double, 3>& err,
                        const OrientedBox3& viewer) {
    const double dx = err[0], dy = err[1], dyaw = err[2];
    if (dx == 0.0 && dy == 0.0 && dyaw == 0.0) return gt;  // clean path stays bit-exact
    const double c = std::cos(dyaw);
    const double s = std::sin(dyaw);
    const double rx = gt.cx - viewer.cx;
    const double ry = gt.cy - viewer.cy;
    return OrientedBox3(viewer.cx + c * rx - s * ry + dx, viewer.cy + s * rx + c * ry + dy, gt.cz,
                        gt.l, gt.w, gt.h, gt.yaw + dyaw);
}

/// Jitters center/size/yaw, then dilates so the result encloses the target
/// box: detectors fit boxes around the evidence, they do not truncate it.
OrientedBox3 jitter_enclosing(const OrientedBox3& target, const SurrogateConfig& cfg,
                              Xoshiro256pp& rng) {
    const double cx = target.cx + rng.gaussian(0.0, cfg.jitter_pos);
    const double cy = target.cy + rng.gaussian(0.0, cfg.jitter_pos);
    const double cz = target.cz + rng.gaussian(0.0, 0.5 * cfg.jitter_pos);
    const double l0 = target.l * (1.0 + rng.gaussian(0.0, cfg.jitter_size));
    const double w0 = target.w * (1.0 + rng.gaussian(0.0, cfg.jitter_size));
    const double h0 = target.h * (1.0 + rng.gaussian(0.0, cfg.jitter_size));
    const double yaw = target.yaw + rng.gaussian(0.0, cfg.jitter_yaw);

    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    double need_x = 0.0, need_y = 0.0;
    for (const Vec2& corner : target.bev_corners()) {
        const double dx = corner.x - cx;
        const double dy = corner.y - cy;
        need_x = std::max(need_x, std::abs(c * dx + s * dy));
        need_y = std::max(need_y, std::abs(-s * dx + c * dy));
    }
    const double need_z = std::max(target.z_hi() - cz, cz - target.z_lo());
    return OrientedBox3(cx, cy, cz, std::max(l0, 2.0 * need_x), std::max(w0, 2.0 * need_y),
                        std::max(h0, 2.0 * need_z), yaw);
}

}  // namespace

std::vector<ScoredLabel> surrogate_detect(const scene::SceneFrame& frame,
                                          const SurrogateConfig& cfg) {
    Xoshiro256pp rng =
        Xoshiro256pp::derive(cfg.seed, {frame.frame_id, rng::streams::kSurrogate});
    std::vector<ScoredLabel> out;

    // True positives. The detecting view is sampled with weight inverse to
    // squared distance, mirroring that nearby agents dominate detection.
    // Every RNG draw here depends only on stored poses and gt, never on the
    // noise realization, so detections replay identically across noise runs.
    for (std::size_t i = 0; i < frame.gt_boxes.size(); ++i) {
        if (!cfg.detect_agents && frame.gt_agent_id[i] >= 0) continue;
        if (rng.uniform() >= cfg.p_detect) continue;
        const OrientedBox3& gt = frame.gt_boxes[i];

        double total_w = 0.0;
        std::vector<double> weights(frame.agents.size());
        for (std::size_t a = 0; a < frame.agents.size(); ++a) {
            const double dx = frame.agents[a].box.cx - gt.cx;
            const double dy = frame.agents[a].box.cy - gt.cy;
            weights[a] = 1.0 / std::max(dx * dx + dy * dy, 0.01);
            total_w += weights[a];
        }
        std::size_t view = frame.agents.size() - 1;
        double pick = rng.uniform() * total_w;
        for (std::size_t a = 0; a < frame.agents.size(); ++a) {
            pick -= weights[a];
            if (pick < 0.0) {
                view = a;
                break;
            }
        }

        const OrientedBox3 apparent = as_seen_by(gt, frame.pose_errors[view],
                                                 frame.agents[view].box);
        const OrientedBox3 box = jitter_enclosing(apparent, cfg, rng);
        const double score = rng.beta(cfg.tp_score_a, cfg.tp_score_b);
        out.push_back(ScoredLabel{box, score, LabelOrigin::surrogate_tp});
    }

    // False positives: clutter near objects or free space, kept clear of gt.
    const std::uint64_t n_fp = rng.poisson(cfg.fp_per_frame);
    const auto& ext = frame.extent;
    for (std::uint64_t k = 0; k < n_fp; ++k) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double l = rng.uniform(cfg.fp_len_lo, cfg.fp_len_hi);
            const double w = rng.uniform(cfg.fp_wid_lo, cfg.fp_wid_hi);
            const double h = rng.uniform(cfg.fp_hgt_lo, cfg.fp_hgt_hi);
            const double half_diag = 0.5 * std::hypot(l, w);
            double x, y;
            if (!frame.gt_boxes.empty() && rng.uniform() < cfg.clutter_frac) {
                const std::size_t anchor = rng.uniform_int(frame.gt_boxes.size());
                const double angle = rng.uniform(-M_PI, M_PI);
                const double dist = rng.uniform(2.0, 5.0);
                x = frame.gt_boxes[anchor].cx + dist * std::cos(angle);
                y = frame.gt_boxes[anchor].cy + dist * std::sin(angle);
            } else {
                x = rng.uniform(ext[0] + half_diag, ext[1] - half_diag);
                y = rng.uniform(ext[2] + half_diag, ext[3] - half_diag);
            }
            const double yaw = rng.uniform(-M_PI, M_PI);
            if (x < ext[0] + half_diag || x > ext[1] - half_diag || y < ext[2] + half_diag ||
                y > ext[3] - half_diag) {
                continue;
            }
            const OrientedBox3 box(x, y, 0.5 * h, l, w, h, yaw);
            bool clear = true;
            for (const OrientedBox3& gt : frame.gt_boxes) {
                if (geo::bev_iou(box, gt) >= cfg.fp_iou_max) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                const double score = rng.beta(cfg.fp_score_a, cfg.fp_score_b);
                out.push_back(ScoredLabel{box, score, LabelOrigin::surrogate_fp});
                break;
            }
        }
    }
    return out;
}

std::vector<ScoredLabel> threshold_filter(const std::vector<ScoredLabel>& labels, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("threshold_filter: delta must be in [0, 1]");
    }
    std::vector<ScoredLabel> out;
    out.reserve(labels.size());
    for (const ScoredLabel& lab : labels) {
        if (lab.score >= delta) out.push_back(lab);
    }
    return out;
}

}  // namespace colabel::prelim
