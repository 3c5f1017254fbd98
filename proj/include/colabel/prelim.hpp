#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "colabel/geometry.hpp"
#include "colabel/scene.hpp"

namespace colabel::prelim {

/// Where a label came from. Diagnostics only: filtering and evaluation never
/// read this field.
enum class LabelOrigin { agent_shared, surrogate_tp, surrogate_fp, external };

std::string_view origin_name(LabelOrigin origin);
std::optional<LabelOrigin> origin_from_name(std::string_view name);

struct ScoredLabel {
    geo::OrientedBox3 box;
    double score = 0.0;  // confidence in [0, 1]
    LabelOrigin origin = LabelOrigin::external;
};

/// Detector stand-in. True positives are drawn per object with probability
/// p_detect as a jittered box dilated to enclose the object as that view
/// perceives it (a detector wraps the point evidence it sees, so a view
/// with pose error localizes the object at its displaced position). False
/// positives are a free-space/near-object mixture kept below fp_iou_max
/// overlap with every real box.
struct SurrogateConfig {
    double p_detect = 0.9;
    double jitter_pos = 0.1;    // m, std of the center perturbation (z uses half)
    double jitter_size = 0.03;  // relative std of each extent
    double jitter_yaw = 0.02;   // rad, std of the heading perturbation
    double fp_per_frame = 10.0;  // Poisson mean of false positives per frame
    double fp_iou_max = 0.1;     // FP boxes stay below this BEV IoU vs any gt
    double clutter_frac = 0.3;   // fraction of FPs anchored near real objects
    double tp_score_a = 8.0, tp_score_b = 2.0;  // TP score ~ Beta(a, b)
    double fp_score_a = 2.0, fp_score_b = 6.0;  // FP score ~ Beta(a, b)
    bool detect_agents = true;  // agents are objects too; pipelines that add
                                // agent_labels separately turn this off
    std::uint64_t seed = 0;
    // FP size priors (uniform)
    double fp_len_lo = 2.5, fp_len_hi = 5.5;
    double fp_wid_lo = 1.2, fp_wid_hi = 2.4;
    double fp_hgt_lo = 1.0, fp_hgt_hi = 2.0;
};

/// One label per agent from its shared ego-shape/pose, score 1.0.
std::vector<ScoredLabel> agent_labels(const scene::SceneFrame& frame);

/// Scored preliminary labels for one frame; deterministic in
/// (cfg.seed, frame.frame_id) and independent of any noise seed, so the same
/// detections land on clean and noise-shifted variants of a frame.
std::vector<ScoredLabel> surrogate_detect(const scene::SceneFrame& frame,
                                          const SurrogateConfig& cfg);

/// Keeps labels with score >= delta, preserving order.
std::vector<ScoredLabel> threshold_filter(const std::vector<ScoredLabel>& labels, double delta);

}  // namespace colabel::prelim
