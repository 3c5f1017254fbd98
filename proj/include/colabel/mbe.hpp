#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "colabel/geometry.hpp"
#include "colabel/prelim.hpp"
#include "colabel/scene.hpp"

namespace colabel::mbe {

using geo::OrientedBox3;
using geo::PointCloud;

/// Per-view encoding of one label. r and o are empty when the view has no
/// evidence (no interior points, or a degenerate hull); such views abstain.
struct EncodingTriple {
    std::optional<double> r;   // collision ratio, >= 0 when present
    std::optional<double> o;   // boundary occupancy in [0, 1] when present
    double d = 0.0;            // information confidence, > 0
    int view_id = 0;
    std::size_t n_points = 0;  // interior points of this view
};

struct MbeParams {
    double eta_enlarge = 0.5;  // context box grows by this factor
    double eta_reduce = 0.2;   // reduced box shrinks by this factor
    double phi_r = 0.1;        // collision tolerance
    double phi_o = 0.7;        // alignment tolerance
    std::size_t n_min = 5;     // minimum interior points for a view to vote
    double epsilon_d = 0.01;   // m^2 floor on squared center distance
};

enum class Verdict { high, low };

struct QualityVerdict {
    std::size_t label_index = 0;
    Verdict verdict = Verdict::low;
    std::optional<double> aggregated_r;  // empty when no view qualified
    std::optional<double> aggregated_o;
    std::vector<EncodingTriple> per_view;
};

/// Collision ratio: points gained by growing the box by eta_enlarge,
/// relative to the interior count. Empty when the box holds no points.
/// Also returns the interior count.
std::pair<std::optional<double>, std::size_t> encode_cpe(const OrientedBox3& box,
                                                         const PointCloud& cloud,
                                                         double eta_enlarge);

/// Boundary occupancy: fraction of the interior points' BEV hull vertices
/// that escape the box shrunk by eta_reduce. Empty when the hull is
/// degenerate (fewer than 3 distinct non-collinear interior points).
std::optional<double> encode_bae(const OrientedBox3& box, const PointCloud& cloud,
                                 double eta_reduce);

/// Information confidence: inverse squared BEV distance between the label
/// center and the agent center, floored at epsilon_d.
double encode_ice(const OrientedBox3& box, const scene::AgentPose& agent, double epsilon_d);

/// Two-condition vote over the qualifying views (valid r, valid o, and at
/// least n_min interior points), with d-weights renormalized over that
/// subset: high iff weighted r < phi_r and weighted o > phi_o. No
/// qualifying view means low with empty aggregates.
QualityVerdict discriminate(const std::vector<EncodingTriple>& per_view, const MbeParams& params);

/// Per-view encodings for every label against every agent's own cloud.
std::vector<std::vector<EncodingTriple>> encode_labels(
    const scene::SceneFrame& frame, const std::vector<prelim::ScoredLabel>& labels,
    const MbeParams& params);

struct FilterResult {
    std::vector<prelim::ScoredLabel> high;
    std::vector<prelim::ScoredLabel> low;
    std::vector<QualityVerdict> verdicts;  // one per input label, input order
};

/// Encodes and discriminates every label, partitioning the input in stable
/// order. Labels are processed in parallel; results are identical to
/// filter_labels_serial.
FilterResult filter_labels(const scene::SceneFrame& frame,
                           const std::vector<prelim::ScoredLabel>& labels,
                           const MbeParams& params);

/// Single-threaded reference implementation of filter_labels.
FilterResult filter_labels_serial(const scene::SceneFrame& frame,
                                  const std::vector<prelim::ScoredLabel>& labels,
                                  const MbeParams& params);

}  // namespace colabel::mbe
