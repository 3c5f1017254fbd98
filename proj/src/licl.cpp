#include "colabel/licl.hpp"

#include <algorithm>
#include <cmath>

namespace colabel::licl {

FeatureGrid FeatureGrid::zeros(std::size_t w, std::size_t h, std::size_t c,
                               const scene::Extent& extent) {
    FeatureGrid g;
    g.width = w;
    g.height = h;
    g.channels = c;
    g.extent = extent;
    g.values.assign(w * h * c, 0.0);
    return g;
}

std::pair<std::size_t, std::size_t> grid_index(const OrientedBox3& box, const FeatureGrid& grid) {
    const auto& e = grid.extent;
    if (box.cx < e[0] || box.cx > e[1] || box.cy < e[2] || box.cy > e[3]) {
        throw OutOfExtent("grid_index: box center outside the grid extent");
    }
    const double fx = (box.cx - e[0]) / (e[1] - e[0]) * static_cast<double>(grid.width);
    const double fy = (box.cy - e[2]) / (e[3] - e[2]) * static_cast<double>(grid.height);
    const std::size_t ix = std::min(static_cast<std::size_t>(std::max(std::floor(fx), 0.0)),
                                    grid.width - 1);
    const std::size_t iy = std::min(static_cast<std::size_t>(std::max(std::floor(fy), 0.0)),
                                    grid.height - 1);
    return {ix, iy};
}

namespace {

using Feature = std::vector<double>;

double dot(const Feature& a, const Feature& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double log_sum_exp(const std::vector<double>& xs) {
    const double m = *std::max_element(xs.begin(), xs.end());
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

/// Everything both the loss and the gradient need: per-box cell ids, raw and
/// (optionally) normalized features.
struct Instance {
    std::size_t cells;  // W*H
    std::vector<std::size_t> pos_cell, neg_cell;
    std::vector<Feature> pos_raw, neg_raw;
    std::vector<Feature> g;  // positive features as used by the loss
    std::vector<Feature> h;  // negative features as used by the loss
    std::vector<double> pos_norm, neg_norm;  // L2 norms of the raw features
    Feature sum_g;                           // S = sum of positive features
};

Feature cell_feature(const FeatureGrid& grid, std::size_t cell) {
    Feature f(grid.channels);
    const std::size_t x = cell % grid.width;
    const std::size_t y = cell / grid.width;
    for (std::size_t c = 0; c < grid.channels; ++c) f[c] = grid.at(x, y, c);
    return f;
}

Feature normalized(const Feature& u, double norm) {
    if (norm == 0.0) return u;  // zero vector stays zero; gradient skips it
    Feature g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = u[i] / norm;
    return g;
}

Instance prepare(const FeatureGrid& grid, const std::vector<OrientedBox3>& pos_boxes,
                 const std::vector<OrientedBox3>& neg_boxes, const LiclParams& params) {
    if (pos_boxes.empty() || neg_boxes.empty()) {
        throw EmptySet("licl: need at least one positive and one negative box");
    }
    Instance inst;
    inst.cells = grid.width * grid.height;
    auto load = [&](const std::vector<OrientedBox3>& boxes, std::vector<std::size_t>& cells,
                    std::vector<Feature>& raw, std::vector<Feature>& used,
                    std::vector<double>& norms) {
        for (const OrientedBox3& b : boxes) {
            const auto [ix, iy] = grid_index(b, grid);
            const std::size_t cell = iy * grid.width + ix;
            cells.push_back(cell);
            Feature u = cell_feature(grid, cell);
            const double norm = std::sqrt(dot(u, u));
            norms.push_back(norm);
            used.push_back(params.normalize_features ? normalized(u, norm) : u);
            raw.push_back(std::move(u));
        }
    };
    load(pos_boxes, inst.pos_cell, inst.pos_raw, inst.g, inst.pos_norm);
    load(neg_boxes, inst.neg_cell, inst.neg_raw, inst.h, inst.neg_norm);
    inst.sum_g.assign(grid.channels, 0.0);
    for (const Feature& g : inst.g) {
        for (std::size_t c = 0; c < grid.channels; ++c) inst.sum_g[c] += g[c];
    }
    return inst;
}

/// Shipped loss; see licl_loss doc comment. With S = sum_i g_i:
///   L = lse_n(S.h_n / tau) - (1/M) sum_m (g_m.S / tau)
double loss_shipped(const Instance& inst, double tau) {
    const std::size_t m_count = inst.g.size();
    std::vector<double> b(inst.h.size());
    for (std::size_t n = 0; n < inst.h.size(); ++n) b[n] = dot(inst.sum_g, inst.h[n]) / tau;
    double mean_a = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) mean_a += dot(inst.g[m], inst.sum_g) / tau;
    mean_a /= static_cast<double>(m_count);
    return log_sum_exp(b) - mean_a;
}

/// Textbook variant: per anchor m, softmax of the mean positive similarity
/// against each negative similarity.
///   L = (1/M) sum_m [ -a_m + log(exp(a_m) + sum_n exp(g_m.h_n / tau)) ]
/// with a_m = g_m.S / (M tau).
double loss_textbook(const Instance& inst, double tau) {
    const double m_count = static_cast<double>(inst.g.size());
    double total = 0.0;
    for (const Feature& gm : inst.g) {
        const double a = dot(gm, inst.sum_g) / (m_count * tau);
        std::vector<double> exps{a};
        for (const Feature& hn : inst.h) exps.push_back(dot(gm, hn) / tau);
        total += -a + log_sum_exp(exps);
    }
    return total / m_count;
}

/// Softmax over the denominator terms of the shipped loss.
std::vector<double> denominator_softmax(const Instance& inst, double tau) {
    std::vector<double> b(inst.h.size());
    for (std::size_t n = 0; n < inst.h.size(); ++n) b[n] = dot(inst.sum_g, inst.h[n]) / tau;
    const double m = *std::max_element(b.begin(), b.end());
    double z = 0.0;
    for (double& x : b) {
        x = std::exp(x - m);
        z += x;
    }
    for (double& x : b) x /= z;
    return b;
}

/// Adds a loss gradient w.r.t. one box's used feature into the grid-value
/// gradient, chaining through L2 normalization when enabled.
void accumulate_box_grad(FeatureGrid& out, const FeatureGrid& grid, std::size_t cell,
                         const Feature& raw, double norm, const Feature& used,
                         const Feature& grad_used, bool normalize) {
    const std::size_t x = cell % grid.width;
    const std::size_t y = cell / grid.width;
    if (!normalize) {
        for (std::size_t c = 0; c < grid.channels; ++c) out.at(x, y, c) += grad_used[c];
        return;
    }
    if (norm == 0.0) return;  // normalization has no defined direction at 0
    // d(u/|u|) applied to grad: (grad - (grad.g) g) / |u|
    const double proj = dot(grad_used, used);
    for (std::size_t c = 0; c < grid.channels; ++c) {
        out.at(x, y, c) += (grad_used[c] - proj * used[c]) / norm;
    }
    (void)raw;
}

FeatureGrid grad_shipped(const Instance& inst, const FeatureGrid& grid, const LiclParams& params) {
    FeatureGrid out = FeatureGrid::zeros(grid.width, grid.height, grid.channels, grid.extent);
    const double tau = params.tau;
    const double m_count = static_cast<double>(inst.g.size());
    const std::vector<double> p = denominator_softmax(inst, tau);

    // dL/dg_j = (1/tau) (sum_n p_n h_n - (2/M) S), the same for every j.
    Feature grad_g(grid.channels, 0.0);
    for (std::size_t n = 0; n < inst.h.size(); ++n) {
        for (std::size_t c = 0; c < grid.channels; ++c) grad_g[c] += p[n] * inst.h[n][c];
    }
    for (std::size_t c = 0; c < grid.channels; ++c) {
        grad_g[c] = (grad_g[c] - 2.0 / m_count * inst.sum_g[c]) / tau;
    }
    for (std::size_t m = 0; m < inst.g.size(); ++m) {
        accumulate_box_grad(out, grid, inst.pos_cell[m], inst.pos_raw[m], inst.pos_norm[m],
                            inst.g[m], grad_g, params.normalize_features);
    }
    // dL/dh_n = (p_n / tau) S
    for (std::size_t n = 0; n < inst.h.size(); ++n) {
        Feature grad_h(grid.channels);
        for (std::size_t c = 0; c < grid.channels; ++c) grad_h[c] = p[n] / tau * inst.sum_g[c];
        accumulate_box_grad(out, grid, inst.neg_cell[n], inst.neg_raw[n], inst.neg_norm[n],
                            inst.h[n], grad_h, params.normalize_features);
    }
    return out;
}

FeatureGrid grad_textbook(const Instance& inst, const FeatureGrid& grid,
                          const LiclParams& params) {
    FeatureGrid out = FeatureGrid::zeros(grid.width, grid.height, grid.channels, grid.extent);
    const double tau = params.tau;
    const std::size_t m_count = inst.g.size();
    const double m_real = static_cast<double>(m_count);

    std::vector<Feature> grad_g(m_count, Feature(grid.channels, 0.0));
    std::vector<Feature> grad_h(inst.h.size(), Feature(grid.channels, 0.0));

    for (std::size_t m = 0; m < m_count; ++m) {
        const double a = dot(inst.g[m], inst.sum_g) / (m_real * tau);
        std::vector<double> exps{a};
        for (const Feature& hn : inst.h) exps.push_back(dot(inst.g[m], hn) / tau);
        const double k = *std::max_element(exps.begin(), exps.end());
        double z = 0.0;
        for (double& x : exps) {
            x = std::exp(x - k);
            z += x;
        }
        const double q0 = exps[0] / z;
        // d/da of (-a + lse) is (q0 - 1); a depends on every g_j through S.
        const double da = (q0 - 1.0) / m_real;  // includes the outer 1/M
        for (std::size_t j = 0; j < m_count; ++j) {
            const double self = (j == m) ? 1.0 : 0.0;
            for (std::size_t c = 0; c < grid.channels; ++c) {
                grad_g[j][c] +=
                    da * (self * inst.sum_g[c] + inst.g[m][c]) / (m_real * tau);
            }
        }
        for (std::size_t n = 0; n < inst.h.size(); ++n) {
            const double qn = exps[n + 1] / z;
            for (std::size_t c = 0; c < grid.channels; ++c) {
                grad_g[m][c] += qn / m_real * inst.h[n][c] / tau;
                grad_h[n][c] += qn / m_real * inst.g[m][c] / tau;
            }
        }
    }
    for (std::size_t m = 0; m < m_count; ++m) {
        accumulate_box_grad(out, grid, inst.pos_cell[m], inst.pos_raw[m], inst.pos_norm[m],
                            inst.g[m], grad_g[m], params.normalize_features);
    }
    for (std::size_t n = 0; n < inst.h.size(); ++n) {
        accumulate_box_grad(out, grid, inst.neg_cell[n], inst.neg_raw[n], inst.neg_norm[n],
                            inst.h[n], grad_h[n], params.normalize_features);
    }
    return out;
}

}  // namespace

double licl_loss(const FeatureGrid& grid, const std::vector<OrientedBox3>& pos_boxes,
                 const std::vector<OrientedBox3>& neg_boxes, const LiclParams& params) {
    const Instance inst = prepare(grid, pos_boxes, neg_boxes, params);
    return params.textbook_variant ? loss_textbook(inst, params.tau)
                                   : loss_shipped(inst, params.tau);
}

FeatureGrid licl_grad(const FeatureGrid& grid, const std::vector<OrientedBox3>& pos_boxes,
                      const std::vector<OrientedBox3>& neg_boxes, const LiclParams& params) {
    const Instance inst = prepare(grid, pos_boxes, neg_boxes, params);
    return params.textbook_variant ? grad_textbook(inst, grid, params)
                                   : grad_shipped(inst, grid, params);
}

double total_loss(double l_reg, double l_cls, double l_licl, const LiclParams& params) {
    return params.alpha * l_reg + params.beta * l_cls + params.gamma * l_licl;
}

}  // namespace colabel::licl
