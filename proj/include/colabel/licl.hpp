#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "colabel/geometry.hpp"
#include "colabel/scene.hpp"

namespace colabel::licl {

using geo::OrientedBox3;

/// A box center fell outside the grid extent.
struct OutOfExtent : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Loss requested with no positives or no negatives.
struct EmptySet : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense BEV feature map over a scene extent.
struct FeatureGrid {
    std::size_t width = 0, height = 0, channels = 0;
    scene::Extent extent{};
    std::vector<double> values;  // layout: (c*height + y)*width + x

    static FeatureGrid zeros(std::size_t w, std::size_t h, std::size_t c,
                             const scene::Extent& extent);

    double at(std::size_t x, std::size_t y, std::size_t c) const {
        return values[(c * height + y) * width + x];
    }
    double& at(std::size_t x, std::size_t y, std::size_t c) {
        return values[(c * height + y) * width + x];
    }
};

struct LiclParams {
    double tau = 0.07;   // temperature
    double gamma = 1.0;  // contrastive term weight in the combined loss
    double alpha = 1.0;  // detector regression weight (combiner only)
    double beta = 1.0;   // detector classification weight (combiner only)
    bool normalize_features = true;
    // The shipped loss exponentiates sums of similarities and shares one
    // denominator across positives. This flag switches to a per-anchor
    // softmax over {mean positive similarity, each negative similarity}.
    bool textbook_variant = false;
};

/// Cell index of a box center: floor(relative_position * W), clamped to the
/// grid. Throws OutOfExtent when the center is outside the extent.
std::pair<std::size_t, std::size_t> grid_index(const OrientedBox3& box, const FeatureGrid& grid);

/// Contrastive loss over the features at the positive and negative boxes'
/// cells. M = |pos_boxes|, N = |neg_boxes|:
///   L = -(1/M) sum_m log[ exp(sum_i f_m.f_i / tau)
///                        / sum_n exp(sum_i f_i.f_n / tau) ]
/// evaluated with log-sum-exp shifting. Throws EmptySet when M or N is 0.
double licl_loss(const FeatureGrid& grid, const std::vector<OrientedBox3>& pos_boxes,
                 const std::vector<OrientedBox3>& neg_boxes, const LiclParams& params);

/// Analytic gradient of licl_loss with respect to every grid value,
/// including the normalization Jacobian when enabled. Cells no box indexes
/// have exactly zero gradient; boxes sharing a cell accumulate.
FeatureGrid licl_grad(const FeatureGrid& grid, const std::vector<OrientedBox3>& pos_boxes,
                      const std::vector<OrientedBox3>& neg_boxes, const LiclParams& params);

/// Combined objective: alpha*l_reg + beta*l_cls + gamma*l_licl.
double total_loss(double l_reg, double l_cls, double l_licl, const LiclParams& params);

}  // namespace colabel::licl
