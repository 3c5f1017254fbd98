#include "colabel/mbe.hpp"

#include <cmath>

namespace colabel::mbe {

using geo::Vec2;
using geo::Vec3;

std::pair<std::optional<double>, std::size_t> encode_cpe(const OrientedBox3& box,
                                                         const PointCloud& cloud,
                                                         double eta_enlarge) {
    const OrientedBox3 enlarged = geo::scale_box(box, eta_enlarge);
    std::size_t inside = 0, inside_enlarged = 0;
    for (const Vec3& p : cloud.points) {
        if (geo::point_in_box(p, enlarged)) {
            ++inside_enlarged;
            if (geo::point_in_box(p, box)) ++inside;
        }
    }
    if (inside == 0) return {std::nullopt, 0};
    const double r = static_cast<double>(inside_enlarged - inside) / static_cast<double>(inside);
    return {r, inside};
}

std::optional<double> encode_bae(const OrientedBox3& box, const PointCloud& cloud,
                                 double eta_reduce) {
    std::vector<Vec2> interior_bev;
    for (const Vec3& p : cloud.points) {
        if (geo::point_in_box(p, box)) interior_bev.push_back(Vec2{p.x, p.y});
    }
    const auto hull = geo::convex_hull_2d(interior_bev);
    if (!hull.has_value()) return std::nullopt;
    const OrientedBox3 reduced = geo::scale_box(box, -eta_reduce);
    std::size_t kept = 0;
    for (const Vec2& v : hull->vertices) {
        if (geo::point_in_footprint(v.x, v.y, reduced)) ++kept;
    }
    const double total = static_cast<double>(hull->vertices.size());
    return (total - static_cast<double>(kept)) / total;
}

double encode_ice(const OrientedBox3& box, const scene::AgentPose& agent, double epsilon_d) {
    const double dx = agent.box.cx - box.cx;
    const double dy = agent.box.cy - box.cy;
    return 1.0 / std::max(dx * dx + dy * dy, epsilon_d);
}

QualityVerdict discriminate(const std::vector<EncodingTriple>& per_view, const MbeParams& params) {
    QualityVerdict out;
    out.per_view = per_view;
    double sum_d = 0.0;
    for (const EncodingTriple& t : per_view) {
        if (t.r.has_value() && t.o.has_value() && t.n_points >= params.n_min) sum_d += t.d;
    }
    if (sum_d <= 0.0) {
        out.verdict = Verdict::low;  // nobody saw enough of this label
        return out;
    }
    double weighted_r = 0.0, weighted_o = 0.0;
    for (const EncodingTriple& t : per_view) {
        if (t.r.has_value() && t.o.has_value() && t.n_points >= params.n_min) {
            const double weight = t.d / sum_d;
            weighted_r += *t.r * weight;
            weighted_o += *t.o * weight;
        }
    }
    out.aggregated_r = weighted_r;
    out.aggregated_o = weighted_o;
    out.verdict =
        (weighted_r < params.phi_r && weighted_o > params.phi_o) ? Verdict::high : Verdict::low;
    return out;
}

namespace {

std::vector<EncodingTriple> encode_one(const scene::SceneFrame& frame,
                                       const prelim::ScoredLabel& label,
                                       const MbeParams& params) {
    std::vector<EncodingTriple> per_view;
    per_view.reserve(frame.agents.size());
    for (std::size_t a = 0; a < frame.agents.size(); ++a) {
        EncodingTriple t;
        t.view_id = frame.agents[a].agent_id;
        auto [r, n_points] = encode_cpe(label.box, frame.clouds[a], params.eta_enlarge);
        t.r = r;
        t.n_points = n_points;
        t.o = encode_bae(label.box, frame.clouds[a], params.eta_reduce);
        t.d = encode_ice(label.box, frame.agents[a], params.epsilon_d);
        per_view.push_back(std::move(t));
    }
    return per_view;
}

FilterResult partition(const std::vector<prelim::ScoredLabel>& labels,
                       std::vector<QualityVerdict>&& verdicts) {
    FilterResult res;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (verdicts[i].verdict == Verdict::high) {
            res.high.push_back(labels[i]);
        } else {
            res.low.push_back(labels[i]);
        }
    }
    res.verdicts = std::move(verdicts);
    return res;
}

}  // namespace

std::vector<std::vector<EncodingTriple>> encode_labels(
    const scene::SceneFrame& frame, const std::vector<prelim::ScoredLabel>& labels,
    const MbeParams& params) {
    std::vector<std::vector<EncodingTriple>> out(labels.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(labels.size()); ++i) {
        out[i] = encode_one(frame, labels[i], params);
    }
    return out;
}

FilterResult filter_labels(const scene::SceneFrame& frame,
                           const std::vector<prelim::ScoredLabel>& labels,
                           const MbeParams& params) {
    std::vector<QualityVerdict> verdicts(labels.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(labels.size()); ++i) {
        verdicts[i] = discriminate(encode_one(frame, labels[i], params), params);
        verdicts[i].label_index = static_cast<std::size_t>(i);
    }
    return partition(labels, std::move(verdicts));
}

FilterResult filter_labels_serial(const scene::SceneFrame& frame,
                                  const std::vector<prelim::ScoredLabel>& labels,
                                  const MbeParams& params) {
    std::vector<QualityVerdict> verdicts(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        verdicts[i] = discriminate(encode_one(frame, labels[i], params), params);
        verdicts[i].label_index = i;
    }
    return partition(labels, std::move(verdicts));
}

}  // namespace colabel::mbe
