#include "colabel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace colabel::eval {

const std::vector<double> kPhiRGrid{0.01, 0.05, 0.10, 0.15, 0.20};
const std::vector<double> kPhiOGrid{0.1, 0.3, 0.5, 0.7, 0.8, 0.9};
const std::vector<std::pair<double, double>> kEtaGrid{
    {0.4, 0.2}, {0.4, 0.3}, {0.5, 0.2}, {0.5, 0.3}, {0.6, 0.2}, {0.6, 0.3}, {0.6, 0.4}};
const std::vector<double> kSigmaGrid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
const std::vector<double> kDeltaGrid{0.01, 0.1, 0.3, 0.5, 0.7, 0.9};

namespace {

double pair_iou(const OrientedBox3& a, const OrientedBox3& b, IouMode mode) {
    return mode == IouMode::bev ? geo::bev_iou(a, b) : geo::iou_3d(a, b);
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string format_eta(const std::pair<double, double>& eta) {
    return format_value(eta.first) + "/" + format_value(eta.second);
}

}  // namespace

MatchReport match_labels(const std::vector<ScoredLabel>& labels,
                         const std::vector<OrientedBox3>& gt, double iou_threshold, IouMode mode) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::invalid_argument("match_labels: iou_threshold must be in (0, 1)");
    }
    MatchReport rep;
    rep.iou_threshold = iou_threshold;
    rep.matched_iou.assign(labels.size(), -1.0);

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return labels[a].score > labels[b].score;
    });

    std::vector<bool> gt_taken(gt.size(), false);
    for (const std::size_t li : order) {
        double best_iou = 0.0;
        std::size_t best_gt = gt.size();
        for (std::size_t gi = 0; gi < gt.size(); ++gi) {
            if (gt_taken[gi]) continue;
            const double iou = pair_iou(labels[li].box, gt[gi], mode);
            if (iou > best_iou) {  // strict: ties stay with the lower gt index
                best_iou = iou;
                best_gt = gi;
            }
        }
        if (best_gt < gt.size() && best_iou >= iou_threshold) {
            gt_taken[best_gt] = true;
            rep.matched_iou[li] = best_iou;
            ++rep.tp;
        }
    }
    rep.fp = labels.size() - rep.tp;
    rep.fn = gt.size() - rep.tp;
    rep.recall = rep.tp + rep.fn > 0
                     ? static_cast<double>(rep.tp) / static_cast<double>(rep.tp + rep.fn)
                     : 0.0;
    rep.precision = rep.tp + rep.fp > 0
                        ? static_cast<double>(rep.tp) / static_cast<double>(rep.tp + rep.fp)
                        : 0.0;
    return rep;
}

MatchReport merge_reports(const std::vector<MatchReport>& reports) {
    MatchReport out;
    for (const MatchReport& r : reports) {
        out.tp += r.tp;
        out.fp += r.fp;
        out.fn += r.fn;
        out.matched_iou.insert(out.matched_iou.end(), r.matched_iou.begin(), r.matched_iou.end());
        out.iou_threshold = r.iou_threshold;
    }
    out.recall = out.tp + out.fn > 0
                     ? static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn)
                     : 0.0;
    out.precision = out.tp + out.fp > 0
                        ? static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp)
                        : 0.0;
    return out;
}

Histogram iou_histogram(const std::vector<ScoredLabel>& labels,
                        const std::vector<OrientedBox3>& gt, std::size_t bins, IouMode mode) {
    if (bins < 1) throw std::invalid_argument("iou_histogram: need at least one bin");
    const MatchReport rep = match_labels(labels, gt, 1e-9, mode);
    Histogram h;
    h.counts.assign(bins, 0);
    for (const double iou : rep.matched_iou) {
        if (iou < 0.0) {
            ++h.unmatched;
            continue;
        }
        const std::size_t bin = std::min(static_cast<std::size_t>(iou * static_cast<double>(bins)),
                                         bins - 1);
        ++h.counts[bin];
    }
    return h;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("spearman: need two equal-length series");
    }
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;  // a constant series has no rank trend
    return sxy / std::sqrt(sxx * syy);
}

Corpus make_corpus(const CorpusSpec& spec) {
    Corpus corpus;
    corpus.frames = scene::generate_corpus(spec.scene, spec.frames, spec.seed);
    corpus.labels.resize(corpus.frames.size());
    for (std::size_t i = 0; i < corpus.frames.size(); ++i) {
        std::vector<ScoredLabel> labels = prelim::agent_labels(corpus.frames[i]);
        const std::vector<ScoredLabel> detected =
            prelim::surrogate_detect(corpus.frames[i], spec.surrogate);
        labels.insert(labels.end(), detected.begin(), detected.end());
        corpus.labels[i] = prelim::threshold_filter(labels, spec.delta);
    }
    return corpus;
}

Corpus make_noisy_corpus(const CorpusSpec& spec, const scene::NoiseModel& noise) {
    Corpus corpus;
    corpus.frames = scene::generate_corpus(spec.scene, spec.frames, spec.seed);
    corpus.labels.resize(corpus.frames.size());
    for (std::size_t i = 0; i < corpus.frames.size(); ++i) {
        corpus.frames[i] = scene::apply_localization_noise(corpus.frames[i], noise);
        std::vector<ScoredLabel> labels = prelim::agent_labels(corpus.frames[i]);
        const std::vector<ScoredLabel> detected =
            prelim::surrogate_detect(corpus.frames[i], spec.surrogate);
        labels.insert(labels.end(), detected.begin(), detected.end());
        corpus.labels[i] = prelim::threshold_filter(labels, spec.delta);
    }
    return corpus;
}

MatchReport evaluate_corpus(const std::vector<scene::SceneFrame>& frames,
                            const std::vector<std::vector<ScoredLabel>>& labels,
                            double iou_threshold, IouMode mode) {
    std::vector<MatchReport> reports(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        reports[i] = match_labels(labels[i], frames[i].gt_boxes, iou_threshold, mode);
    }
    return merge_reports(reports);
}

namespace {

/// Applies given thresholds to precomputed encodings and evaluates the kept
/// labels over the whole corpus.
SweepRow discriminate_and_eval(const Corpus& corpus,
                               const std::vector<std::vector<std::vector<mbe::EncodingTriple>>>&
                                   encodings,
                               const mbe::MbeParams& params, double iou_threshold, IouMode mode,
                               std::string param, std::string value) {
    std::vector<std::vector<ScoredLabel>> kept(corpus.frames.size());
    for (std::size_t f = 0; f < corpus.frames.size(); ++f) {
        for (std::size_t i = 0; i < corpus.labels[f].size(); ++i) {
            if (mbe::discriminate(encodings[f][i], params).verdict == mbe::Verdict::high) {
                kept[f].push_back(corpus.labels[f][i]);
            }
        }
    }
    const MatchReport rep = evaluate_corpus(corpus.frames, kept, iou_threshold, mode);
    return SweepRow{std::move(param), std::move(value), rep.recall, rep.precision,
                    rep.tp,           rep.fp,           rep.fn};
}

std::vector<std::vector<std::vector<mbe::EncodingTriple>>> encode_corpus(
    const Corpus& corpus, const mbe::MbeParams& params) {
    std::vector<std::vector<std::vector<mbe::EncodingTriple>>> encodings(corpus.frames.size());
    for (std::size_t f = 0; f < corpus.frames.size(); ++f) {
        encodings[f] = mbe::encode_labels(corpus.frames[f], corpus.labels[f], params);
    }
    return encodings;
}

}  // namespace

SweepResult sweep_mbe(const Corpus& corpus, const std::vector<double>& phi_r_grid,
                      const std::vector<double>& phi_o_grid,
                      const std::vector<std::pair<double, double>>& eta_grid,
                      const mbe::MbeParams& base, double iou_threshold, IouMode mode) {
    SweepResult result;
    const auto base_encodings = encode_corpus(corpus, base);
    for (const double phi_r : phi_r_grid) {
        mbe::MbeParams p = base;
        p.phi_r = phi_r;
        result.rows.push_back(discriminate_and_eval(corpus, base_encodings, p, iou_threshold,
                                                    mode, "phi_r", format_value(phi_r)));
    }
    for (const double phi_o : phi_o_grid) {
        mbe::MbeParams p = base;
        p.phi_o = phi_o;
        result.rows.push_back(discriminate_and_eval(corpus, base_encodings, p, iou_threshold,
                                                    mode, "phi_o", format_value(phi_o)));
    }
    for (const auto& eta : eta_grid) {
        mbe::MbeParams p = base;
        p.eta_enlarge = eta.first;
        p.eta_reduce = eta.second;
        const auto encodings = encode_corpus(corpus, p);
        result.rows.push_back(discriminate_and_eval(corpus, encodings, p, iou_threshold, mode,
                                                    "eta", format_eta(eta)));
    }
    return result;
}

SweepResult sweep_delta(const Corpus& corpus, const std::vector<double>& deltas,
                        double iou_threshold, IouMode mode) {
    SweepResult result;
    for (const double delta : deltas) {
        std::vector<std::vector<ScoredLabel>> kept(corpus.frames.size());
        for (std::size_t f = 0; f < corpus.frames.size(); ++f) {
            kept[f] = prelim::threshold_filter(corpus.labels[f], delta);
        }
        const MatchReport rep = evaluate_corpus(corpus.frames, kept, iou_threshold, mode);
        result.rows.push_back(SweepRow{"delta", format_value(delta), rep.recall, rep.precision,
                                       rep.tp, rep.fp, rep.fn});
    }
    return result;
}

NoiseSweepResult sweep_noise(const CorpusSpec& spec, const std::vector<double>& sigma_grid,
                             std::size_t num_seeds, std::uint64_t noise_seed_base,
                             const mbe::MbeParams& params, double iou_threshold, IouMode mode) {
    NoiseSweepResult result;
    for (const double sigma : sigma_grid) {
        for (std::size_t s = 0; s < num_seeds; ++s) {
            scene::NoiseModel noise;
            noise.sigma_xy = sigma;
            noise.seed = noise_seed_base + s;
            const Corpus corpus = make_noisy_corpus(spec, noise);
            std::vector<std::vector<ScoredLabel>> kept(corpus.frames.size());
            for (std::size_t f = 0; f < corpus.frames.size(); ++f) {
                kept[f] =
                    mbe::filter_labels(corpus.frames[f], corpus.labels[f], params).high;
            }
            const MatchReport rep = evaluate_corpus(corpus.frames, kept, iou_threshold, mode);
            result.rows.push_back(NoiseRow{sigma, noise.seed, rep.recall, rep.precision});
        }
    }
    return result;
}

std::vector<NoiseRow> summarize_noise(const NoiseSweepResult& result) {
    std::vector<NoiseRow> out;
    for (const NoiseRow& row : result.rows) {
        if (out.empty() || out.back().sigma != row.sigma) {
            out.push_back(NoiseRow{row.sigma, 0, 0.0, 0.0});
        }
        out.back().recall += row.recall;
        out.back().precision += row.precision;
        out.back().seed += 1;  // reused as the per-sigma row count
    }
    for (NoiseRow& row : out) {
        const double n = static_cast<double>(row.seed);
        row.recall /= n;
        row.precision /= n;
        row.seed = 0;
    }
    return out;
}

}  // namespace colabel::eval
