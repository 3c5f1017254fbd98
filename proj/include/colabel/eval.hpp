#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "colabel/geometry.hpp"
#include "colabel/mbe.hpp"
#include "colabel/prelim.hpp"
#include "colabel/scene.hpp"

namespace colabel::eval {

using geo::OrientedBox3;
using prelim::ScoredLabel;

enum class IouMode { bev, three_d };

struct MatchReport {
    double recall = 0.0;
    double precision = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
    std::vector<double> matched_iou;  // per label in input order; -1 when unmatched
    double iou_threshold = 0.5;
};

/// Greedy one-to-one matching: labels in score-descending order (input order
/// breaks score ties) each claim the unmatched gt box of highest IoU, ties
/// to the lower gt index, subject to IoU >= iou_threshold.
MatchReport match_labels(const std::vector<ScoredLabel>& labels,
                         const std::vector<OrientedBox3>& gt, double iou_threshold, IouMode mode);

/// Sums tp/fp/fn across per-frame reports and recomputes the rates
/// (micro-average); matched IoUs are concatenated in input order.
MatchReport merge_reports(const std::vector<MatchReport>& reports);

struct Histogram {
    std::vector<std::size_t> counts;  // equal-width bins over [0, 1]
    std::size_t unmatched = 0;        // labels that matched no gt at all
};

/// Distribution of label-vs-gt IoU: pairs are matched at a near-zero
/// threshold so that any overlap lands in a bin; the top bin is closed.
Histogram iou_histogram(const std::vector<ScoredLabel>& labels,
                        const std::vector<OrientedBox3>& gt, std::size_t bins,
                        IouMode mode = IouMode::bev);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// A generated corpus with its preliminary labels, frame-aligned.
struct Corpus {
    std::vector<scene::SceneFrame> frames;
    std::vector<std::vector<ScoredLabel>> labels;
};

/// Recipe for the standard corpus: generated frames, agent labels plus
/// surrogate detections (surrogate seeded by `seed`), then the confidence
/// threshold delta.
struct CorpusSpec {
    scene::SceneConfig scene;
    std::size_t frames = 100;
    std::uint64_t seed = 1;
    prelim::SurrogateConfig surrogate;
    double delta = 0.0;
};

Corpus make_corpus(const CorpusSpec& spec);

/// Same recipe but with localization noise applied before the labels are
/// drawn, so detections track each view's displaced perception.
Corpus make_noisy_corpus(const CorpusSpec& spec, const scene::NoiseModel& noise);

/// Micro-averaged match of per-frame label sets against per-frame gt.
MatchReport evaluate_corpus(const std::vector<scene::SceneFrame>& frames,
                            const std::vector<std::vector<ScoredLabel>>& labels,
                            double iou_threshold, IouMode mode);

struct SweepRow {
    std::string param;  // which axis this row belongs to
    std::string value;  // grid value, preformatted (eta pairs print as "a/b")
    double recall = 0.0, precision = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Standard sweep axes.
extern const std::vector<double> kPhiRGrid;
extern const std::vector<double> kPhiOGrid;
extern const std::vector<std::pair<double, double>> kEtaGrid;  // (enlarge, reduce)
extern const std::vector<double> kSigmaGrid;
extern const std::vector<double> kDeltaGrid;

/// Filters the corpus once per grid value and evaluates the kept labels.
/// phi rows reuse one encoding pass per eta; eta rows re-encode.
SweepResult sweep_mbe(const Corpus& corpus, const std::vector<double>& phi_r_grid,
                      const std::vector<double>& phi_o_grid,
                      const std::vector<std::pair<double, double>>& eta_grid,
                      const mbe::MbeParams& base, double iou_threshold, IouMode mode);

/// Confidence-threshold sweep over the raw (unfiltered) labels.
SweepResult sweep_delta(const Corpus& corpus, const std::vector<double>& deltas,
                        double iou_threshold, IouMode mode);

struct NoiseRow {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double recall = 0.0, precision = 0.0;
};

struct NoiseSweepResult {
    std::vector<NoiseRow> rows;
};

/// For each sigma and noise seed: regenerate the noisy corpus, filter, and
/// evaluate the kept labels. Row order: sigma-major, then seed.
NoiseSweepResult sweep_noise(const CorpusSpec& spec, const std::vector<double>& sigma_grid,
                             std::size_t num_seeds, std::uint64_t noise_seed_base,
                             const mbe::MbeParams& params, double iou_threshold, IouMode mode);

/// Mean precision (and recall) per sigma, in grid order.
std::vector<NoiseRow> summarize_noise(const NoiseSweepResult& result);

}  // namespace colabel::eval
