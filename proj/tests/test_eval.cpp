#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "colabel/eval.hpp"
#include "colabel/rng.hpp"
#include "doctest.h"

using namespace colabel;
using eval::IouMode;
using eval::MatchReport;
using geo::OrientedBox3;
using prelim::LabelOrigin;
using prelim::ScoredLabel;

namespace {

ScoredLabel lab(const OrientedBox3& b, double score) {
    return ScoredLabel{b, score, LabelOrigin::external};
}

OrientedBox3 car(double x, double y, double yaw = 0.0) {
    return OrientedBox3(x, y, 0.75, 4.0, 2.0, 1.5, yaw);
}

double pair_iou(const OrientedBox3& a, const OrientedBox3& b, IouMode mode) {
    return mode == IouMode::bev ? geo::bev_iou(a, b) : geo::iou_3d(a, b);
}

/// Independent transcription of the greedy matcher.
MatchReport greedy_oracle(const std::vector<ScoredLabel>& labels,
                          const std::vector<OrientedBox3>& gt, double thr, IouMode mode) {
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a].score > labels[b].score; });
    MatchReport rep;
    rep.iou_threshold = thr;
    rep.matched_iou.assign(labels.size(), -1.0);
    std::vector<bool> taken(gt.size(), false);
    for (const std::size_t li : order) {
        std::size_t best = gt.size();
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < gt.size(); ++gi) {
            if (taken[gi]) continue;
            const double iou = pair_iou(labels[li].box, gt[gi], mode);
            if (iou > best_iou) {
                best_iou = iou;
                best = gi;
            }
        }
        if (best < gt.size() && best_iou >= thr) {
            taken[best] = true;
            rep.matched_iou[li] = best_iou;
            ++rep.tp;
        }
    }
    rep.fp = labels.size() - rep.tp;
    rep.fn = gt.size() - rep.tp;
    return rep;
}

/// Maximum bipartite matching (Kuhn augmenting paths) over IoU >= thr edges.
struct MaxMatch {
    const std::vector<std::vector<std::size_t>>& adj;
    std::vector<std::size_t> gt_owner;
    std::vector<bool> seen;

    bool augment(std::size_t li) {
        for (const std::size_t gi : adj[li]) {
            if (seen[gi]) continue;
            seen[gi] = true;
            if (gt_owner[gi] == SIZE_MAX || augment(gt_owner[gi])) {
                gt_owner[gi] = li;
                return true;
            }
        }
        return false;
    }
};

std::size_t optimal_tp(const std::vector<ScoredLabel>& labels, const std::vector<OrientedBox3>& gt,
                       double thr, IouMode mode) {
    std::vector<std::vector<std::size_t>> adj(labels.size());
    for (std::size_t li = 0; li < labels.size(); ++li) {
        for (std::size_t gi = 0; gi < gt.size(); ++gi) {
            if (pair_iou(labels[li].box, gt[gi], mode) >= thr) adj[li].push_back(gi);
        }
    }
    MaxMatch mm{adj, std::vector<std::size_t>(gt.size(), SIZE_MAX), {}};
    std::size_t matched = 0;
    for (std::size_t li = 0; li < labels.size(); ++li) {
        mm.seen.assign(gt.size(), false);
        if (mm.augment(li)) ++matched;
    }
    return matched;
}

scene::SceneConfig tiny_scene() {
    scene::SceneConfig cfg;
    cfg.extent = {-15.0, 15.0, -15.0, 15.0};
    cfg.num_agents = 2;
    cfg.num_objects = 3;
    cfg.density = 400.0;
    return cfg;
}

eval::CorpusSpec tiny_spec() {
    eval::CorpusSpec spec;
    spec.scene = tiny_scene();
    spec.frames = 4;
    spec.seed = 5;
    spec.surrogate.detect_agents = false;
    spec.surrogate.fp_per_frame = 3.0;
    return spec;
}

}  // namespace

TEST_CASE("perfect labels match perfectly") {
    const std::vector<OrientedBox3> gt{car(0, 0, 0.3), car(8, 2, -1.0), car(-6, 5, 2.2)};
    std::vector<ScoredLabel> labels;
    for (const auto& b : gt) labels.push_back(lab(b, 0.9));
    for (const IouMode mode : {IouMode::bev, IouMode::three_d}) {
        const MatchReport rep = eval::match_labels(labels, gt, 0.5, mode);
        CHECK(rep.tp == 3);
        CHECK(rep.fp == 0);
        CHECK(rep.fn == 0);
        CHECK(rep.recall == 1.0);
        CHECK(rep.precision == 1.0);
        for (const double iou : rep.matched_iou) CHECK(iou == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("empty inputs give zero rates, not NaN") {
    const std::vector<OrientedBox3> gt{car(0, 0)};
    const std::vector<ScoredLabel> labels{lab(car(100, 100), 0.5)};

    const MatchReport no_labels = eval::match_labels({}, gt, 0.5, IouMode::bev);
    CHECK(no_labels.tp == 0);
    CHECK(no_labels.fn == 1);
    CHECK(no_labels.recall == 0.0);
    CHECK(no_labels.precision == 0.0);

    const MatchReport no_gt = eval::match_labels(labels, {}, 0.5, IouMode::bev);
    CHECK(no_gt.fp == 1);
    CHECK(no_gt.fn == 0);
    CHECK(no_gt.matched_iou == std::vector<double>{-1.0});

    const MatchReport nothing = eval::match_labels({}, {}, 0.5, IouMode::bev);
    CHECK(nothing.recall == 0.0);
    CHECK(nothing.precision == 0.0);
}

TEST_CASE("the iou threshold must be a proper fraction") {
    CHECK_THROWS_AS(eval::match_labels({}, {}, 0.0, IouMode::bev), std::invalid_argument);
    CHECK_THROWS_AS(eval::match_labels({}, {}, 1.0, IouMode::bev), std::invalid_argument);
    CHECK_THROWS_AS(eval::match_labels({}, {}, -0.5, IouMode::bev), std::invalid_argument);
    CHECK_THROWS_AS(eval::match_labels({}, {}, std::nan(""), IouMode::bev), std::invalid_argument);
}

TEST_CASE("higher-scoring labels claim gt first") {
    // The high-score label has the worse IoU but still wins the only gt.
    const std::vector<OrientedBox3> gt{car(0, 0)};
    const std::vector<ScoredLabel> labels{lab(car(1.0, 0), 0.9), lab(car(0, 0), 0.5)};
    const MatchReport rep = eval::match_labels(labels, gt, 0.5, IouMode::bev);
    CHECK(rep.tp == 1);
    CHECK(rep.fp == 1);
    CHECK(rep.matched_iou[0] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(rep.matched_iou[1] == -1.0);

    // Equal scores: input order decides.
    const std::vector<ScoredLabel> tied{lab(car(1.0, 0), 0.7), lab(car(0, 0), 0.7)};
    const MatchReport rep2 = eval::match_labels(tied, gt, 0.5, IouMode::bev);
    CHECK(rep2.matched_iou[0] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(rep2.matched_iou[1] == -1.0);
}

TEST_CASE("equal-iou candidates resolve to the lower gt index") {
    // label 0 sits exactly between two identical gt boxes; it must claim
    // gt 0, forcing label 1 (a perfect copy of gt 0) onto gt 1.
    const std::vector<OrientedBox3> gt{car(-1.0, 0), car(1.0, 0)};
    const std::vector<ScoredLabel> labels{lab(car(0, 0), 0.9), lab(car(-1.0, 0), 0.5)};
    const MatchReport rep = eval::match_labels(labels, gt, 0.3, IouMode::bev);
    CHECK(rep.tp == 2);
    CHECK(rep.matched_iou[0] == doctest::Approx(6.0 / 10.0).epsilon(1e-12));
    // 1.0 here would mean label 0 had claimed gt 1 instead
    CHECK(rep.matched_iou[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("matched count is nonincreasing in the threshold") {
    rng::Xoshiro256pp rng(21);
    const std::vector<OrientedBox3> gt{car(0, 0, 0.2), car(7, 1, 1.0), car(-5, -4, -0.7),
                                       car(3, -8, 0.0)};
    std::vector<ScoredLabel> labels;
    for (const auto& b : gt) {
        labels.push_back(lab(OrientedBox3(b.cx + rng.uniform(-1.0, 1.0),
                                          b.cy + rng.uniform(-1.0, 1.0), b.cz, b.l, b.w, b.h,
                                          b.yaw + rng.uniform(-0.2, 0.2)),
                             rng.uniform()));
    }
    labels.push_back(lab(car(12, 12), 0.4));
    std::size_t prev = gt.size() + 1;
    for (const double thr : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
        const std::size_t tp = eval::match_labels(labels, gt, thr, IouMode::bev).tp;
        CHECK(tp <= prev);
        prev = tp;
    }
}

TEST_CASE("matching agrees with a transcription and bounds the optimum") {
    rng::Xoshiro256pp rng(654);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<OrientedBox3> gt;
        const std::size_t n_gt = 1 + rng.uniform_int(5);
        for (std::size_t i = 0; i < n_gt; ++i) {
            gt.push_back(car(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                             rng.uniform(-3.14, 3.14)));
        }
        std::vector<ScoredLabel> labels;
        for (const auto& b : gt) {
            if (rng.uniform() < 0.8) {
                labels.push_back(lab(OrientedBox3(b.cx + rng.uniform(-2.0, 2.0),
                                                  b.cy + rng.uniform(-2.0, 2.0), b.cz, b.l, b.w,
                                                  b.h, b.yaw + rng.uniform(-0.4, 0.4)),
                                     rng.uniform()));
            }
        }
        const std::size_t extra = rng.uniform_int(3);
        for (std::size_t i = 0; i < extra; ++i) {
            labels.push_back(lab(car(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                                     rng.uniform(-3.14, 3.14)),
                                 rng.uniform()));
        }
        const double thr = trial % 2 == 0 ? 0.3 : 0.5;
        const IouMode mode = trial % 3 == 0 ? IouMode::three_d : IouMode::bev;

        const MatchReport got = eval::match_labels(labels, gt, thr, mode);
        const MatchReport want = greedy_oracle(labels, gt, thr, mode);
        CHECK(got.tp == want.tp);
        CHECK(got.fp == want.fp);
        CHECK(got.fn == want.fn);
        REQUIRE(got.matched_iou.size() == want.matched_iou.size());
        for (std::size_t i = 0; i < got.matched_iou.size(); ++i) {
            CHECK(got.matched_iou[i] == want.matched_iou[i]);
        }

        // Greedy is maximal, so it finds at least half the optimum and
        // never more than the optimum.
        const std::size_t opt = optimal_tp(labels, gt, thr, mode);
        CHECK(got.tp <= opt);
        CHECK(2 * got.tp >= opt);
    }
}

TEST_CASE("merging reports micro-averages") {
    MatchReport a;
    a.tp = 3;
    a.fp = 1;
    a.fn = 2;
    a.matched_iou = {0.8, -1.0, 0.9, 0.7};
    a.iou_threshold = 0.5;
    MatchReport b;
    b.tp = 1;
    b.fp = 3;
    b.fn = 0;
    b.matched_iou = {0.6, -1.0, -1.0, -1.0};
    b.iou_threshold = 0.5;
    const MatchReport m = eval::merge_reports({a, b});
    CHECK(m.tp == 4);
    CHECK(m.fp == 4);
    CHECK(m.fn == 2);
    CHECK(m.recall == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.matched_iou.size() == 8);
    CHECK(m.matched_iou[4] == 0.6);

    const MatchReport empty = eval::merge_reports({});
    CHECK(empty.tp == 0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.precision == 0.0);
}

TEST_CASE("histogram conserves labels and closes the top bin") {
    const std::vector<OrientedBox3> gt{car(0, 0), car(8, 0)};
    const std::vector<ScoredLabel> labels{
        lab(car(0, 0), 0.9),        // iou 1.0 -> top bin
        lab(car(8.8, 0), 0.8),      // partial overlap
        lab(car(100, 100), 0.7),    // no overlap -> unmatched
    };
    const eval::Histogram h = eval::iou_histogram(labels, gt, 10);
    CHECK(h.counts.size() == 10);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) + h.unmatched ==
          labels.size());
    CHECK(h.counts[9] >= 1);  // the exact match lands in the closed top bin
    CHECK(h.unmatched == 1);
    CHECK_THROWS_AS(eval::iou_histogram(labels, gt, 0), std::invalid_argument);

    rng::Xoshiro256pp rng(9);
    std::vector<ScoredLabel> noisy;
    for (int i = 0; i < 40; ++i) {
        noisy.push_back(lab(car(rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0)),
                            rng.uniform()));
    }
    const eval::Histogram h2 = eval::iou_histogram(noisy, gt, 7);
    CHECK(std::accumulate(h2.counts.begin(), h2.counts.end(), std::size_t{0}) + h2.unmatched ==
          noisy.size());
}

TEST_CASE("rank correlation hand cases") {
    CHECK(eval::spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(eval::spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    // monotone but nonlinear is still rank-perfect
    CHECK(eval::spearman({1, 2, 3, 4, 5}, {1, 4, 9, 16, 25}) == doctest::Approx(1.0));
    // tie in xs: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4) -> sqrt(0.9)
    CHECK(eval::spearman({1, 2, 2, 3}, {1, 2, 3, 4}) ==
          doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
    // constant series: defined as zero correlation
    CHECK(eval::spearman({5, 5, 5}, {1, 2, 3}) == 0.0);
    CHECK(eval::spearman({1, 2, 3}, {2, 2, 2}) == 0.0);
    CHECK_THROWS_AS(eval::spearman({1, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(eval::spearman({1}, {1}), std::invalid_argument);
}

TEST_CASE("standard sweep axes are pinned") {
    CHECK(eval::kPhiRGrid == std::vector<double>{0.01, 0.05, 0.10, 0.15, 0.20});
    CHECK(eval::kPhiOGrid == std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.8, 0.9});
    CHECK(eval::kEtaGrid ==
          std::vector<std::pair<double, double>>{{0.4, 0.2},
                                                 {0.4, 0.3},
                                                 {0.5, 0.2},
                                                 {0.5, 0.3},
                                                 {0.6, 0.2},
                                                 {0.6, 0.3},
                                                 {0.6, 0.4}});
    CHECK(eval::kSigmaGrid == std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    CHECK(eval::kDeltaGrid == std::vector<double>{0.01, 0.1, 0.3, 0.5, 0.7, 0.9});
}

TEST_CASE("corpus generation aligns labels with frames") {
    const eval::Corpus corpus = eval::make_corpus(tiny_spec());
    REQUIRE(corpus.frames.size() == 4);
    REQUIRE(corpus.labels.size() == 4);
    for (std::size_t f = 0; f < corpus.frames.size(); ++f) {
        CHECK(corpus.frames[f].frame_id == f);
        // each agent shares its own pose once per frame
        std::size_t shared = 0;
        for (const ScoredLabel& l : corpus.labels[f]) {
            if (l.origin == LabelOrigin::agent_shared) ++shared;
            CHECK(l.score >= 0.0);
        }
        CHECK(shared == 2);
    }
}

TEST_CASE("delta sweep rows are ordered and monotone") {
    const eval::Corpus corpus = eval::make_corpus(tiny_spec());
    const std::vector<double> deltas{0.01, 0.3, 0.7};
    const eval::SweepResult sweep = eval::sweep_delta(corpus, deltas, 0.5, IouMode::bev);
    REQUIRE(sweep.rows.size() == 3);
    std::size_t total_gt = 0;
    for (const auto& f : corpus.frames) total_gt += f.gt_boxes.size();
    double prev_recall = 2.0;
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
        const eval::SweepRow& row = sweep.rows[i];
        CHECK(row.param == "delta");
        CHECK(row.tp + row.fn == total_gt);
        CHECK(row.recall <= prev_recall);
        prev_recall = row.recall;
    }
    CHECK(sweep.rows[0].value == "0.01");
    CHECK(sweep.rows[1].value == "0.3");
    CHECK(sweep.rows[2].value == "0.7");
}

TEST_CASE("mbe sweep covers the requested axes in order") {
    const eval::Corpus corpus = eval::make_corpus(tiny_spec());
    const mbe::MbeParams base;
    const eval::SweepResult sweep =
        eval::sweep_mbe(corpus, {0.05, 0.1}, {0.5, 0.7}, {{0.5, 0.2}}, base, 0.5, IouMode::bev);
    REQUIRE(sweep.rows.size() == 5);
    CHECK(sweep.rows[0].param == "phi_r");
    CHECK(sweep.rows[0].value == "0.05");
    CHECK(sweep.rows[1].param == "phi_r");
    CHECK(sweep.rows[1].value == "0.1");
    CHECK(sweep.rows[2].param == "phi_o");
    CHECK(sweep.rows[2].value == "0.5");
    CHECK(sweep.rows[3].param == "phi_o");
    CHECK(sweep.rows[3].value == "0.7");
    CHECK(sweep.rows[4].param == "eta");
    CHECK(sweep.rows[4].value == "0.5/0.2");

    // A phi row at the base parameters equals filtering directly.
    std::vector<MatchReport> reports;
    for (std::size_t f = 0; f < corpus.frames.size(); ++f) {
        const auto split = mbe::filter_labels(corpus.frames[f], corpus.labels[f], base);
        reports.push_back(
            eval::match_labels(split.high, corpus.frames[f].gt_boxes, 0.5, IouMode::bev));
    }
    const MatchReport direct = eval::merge_reports(reports);
    CHECK(sweep.rows[1].tp == direct.tp);  // phi_r = 0.1 is the base value
    CHECK(sweep.rows[1].fp == direct.fp);
    CHECK(sweep.rows[1].fn == direct.fn);
    CHECK(sweep.rows[3].tp == direct.tp);  // phi_o = 0.7 is the base value
}

TEST_CASE("noise sweep is sigma-major and seed-stable at zero") {
    eval::CorpusSpec spec = tiny_spec();
    spec.frames = 3;
    const mbe::MbeParams params;
    const eval::NoiseSweepResult result =
        eval::sweep_noise(spec, {0.0, 0.4}, 2, 900, params, 0.5, IouMode::bev);
    REQUIRE(result.rows.size() == 4);
    CHECK(result.rows[0].sigma == 0.0);
    CHECK(result.rows[0].seed == 900);
    CHECK(result.rows[1].sigma == 0.0);
    CHECK(result.rows[1].seed == 901);
    CHECK(result.rows[2].sigma == 0.4);
    CHECK(result.rows[3].sigma == 0.4);

    // sigma = 0 is bit-identical no matter the seed, and equals the clean run
    CHECK(result.rows[0].recall == result.rows[1].recall);
    CHECK(result.rows[0].precision == result.rows[1].precision);
    const eval::Corpus clean = eval::make_corpus(spec);
    std::vector<MatchReport> reports;
    for (std::size_t f = 0; f < clean.frames.size(); ++f) {
        const auto split = mbe::filter_labels(clean.frames[f], clean.labels[f], params);
        reports.push_back(
            eval::match_labels(split.high, clean.frames[f].gt_boxes, 0.5, IouMode::bev));
    }
    const MatchReport direct = eval::merge_reports(reports);
    CHECK(result.rows[0].recall == direct.recall);
    CHECK(result.rows[0].precision == direct.precision);

    const std::vector<eval::NoiseRow> summary = eval::summarize_noise(result);
    REQUIRE(summary.size() == 2);
    CHECK(summary[0].sigma == 0.0);
    CHECK(summary[0].precision ==
          doctest::Approx(0.5 * (result.rows[0].precision + result.rows[1].precision))
              .epsilon(1e-12));
    CHECK(summary[1].sigma == 0.4);
    CHECK(summary[1].recall ==
          doctest::Approx(0.5 * (result.rows[2].recall + result.rows[3].recall)).epsilon(1e-12));
}
