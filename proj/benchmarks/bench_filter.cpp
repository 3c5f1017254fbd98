// Compares the OpenMP label-filtering and corpus-generation kernels against
// their single-threaded references on one generated workload, checking that
// both produce identical results before reporting timings.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "colabel/mbe.hpp"
#include "colabel/prelim.hpp"
#include "colabel/scene.hpp"

using namespace colabel;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

bool same_verdicts(const std::vector<mbe::FilterResult>& a,
                   const std::vector<mbe::FilterResult>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t f = 0; f < a.size(); ++f) {
        if (a[f].high.size() != b[f].high.size() || a[f].low.size() != b[f].low.size()) {
            return false;
        }
        for (std::size_t i = 0; i < a[f].verdicts.size(); ++i) {
            const mbe::QualityVerdict& va = a[f].verdicts[i];
            const mbe::QualityVerdict& vb = b[f].verdicts[i];
            if (va.verdict != vb.verdict || va.aggregated_r != vb.aggregated_r ||
                va.aggregated_o != vb.aggregated_o) {
                return false;
            }
        }
    }
    return true;
}

bool same_frames(const std::vector<scene::SceneFrame>& a,
                 const std::vector<scene::SceneFrame>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t f = 0; f < a.size(); ++f) {
        if (a[f].gt_boxes.size() != b[f].gt_boxes.size() ||
            a[f].clouds.size() != b[f].clouds.size()) {
            return false;
        }
        for (std::size_t c = 0; c < a[f].clouds.size(); ++c) {
            const auto& pa = a[f].clouds[c].points;
            const auto& pb = b[f].clouds[c].points;
            if (pa.size() != pb.size()) return false;
            for (std::size_t p = 0; p < pa.size(); ++p) {
                if (pa[p].x != pb[p].x || pa[p].y != pb[p].y || pa[p].z != pb[p].z) return false;
            }
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t frames = 12;
    if (argc > 1) frames = static_cast<std::size_t>(std::atoll(argv[1]));

    scene::SceneConfig cfg;
    cfg.num_agents = 3;
    cfg.num_objects = 10;
    cfg.density = 3000.0;

    std::printf("threads: %d, frames: %zu\n\n", omp_get_max_threads(), frames);

    // --- corpus generation ---
    std::vector<scene::SceneFrame> serial_frames;
    const double gen_serial = best_of(3, [&] {
        serial_frames.clear();
        for (std::size_t f = 0; f < frames; ++f) {
            serial_frames.push_back(scene::generate_frame(cfg, 7, f));
        }
    });
    std::vector<scene::SceneFrame> parallel_frames;
    const double gen_parallel =
        best_of(3, [&] { parallel_frames = scene::generate_corpus(cfg, frames, 7); });
    if (!same_frames(serial_frames, parallel_frames)) {
        std::fprintf(stderr, "FATAL: corpus kernels disagree\n");
        return 1;
    }

    // --- label filtering ---
    prelim::SurrogateConfig scfg;
    scfg.fp_per_frame = 20.0;
    std::vector<std::vector<prelim::ScoredLabel>> labels(frames);
    std::size_t total_labels = 0, total_points = 0;
    for (std::size_t f = 0; f < frames; ++f) {
        labels[f] = prelim::agent_labels(parallel_frames[f]);
        const auto det = prelim::surrogate_detect(parallel_frames[f], scfg);
        labels[f].insert(labels[f].end(), det.begin(), det.end());
        total_labels += labels[f].size();
        for (const auto& c : parallel_frames[f].clouds) total_points += c.size();
    }
    std::printf("workload: %zu labels over %zu points\n\n", total_labels, total_points);

    const mbe::MbeParams params;
    std::vector<mbe::FilterResult> serial_results(frames), parallel_results(frames);
    const double filter_serial = best_of(3, [&] {
        for (std::size_t f = 0; f < frames; ++f) {
            serial_results[f] = mbe::filter_labels_serial(parallel_frames[f], labels[f], params);
        }
    });
    const double filter_parallel = best_of(3, [&] {
        for (std::size_t f = 0; f < frames; ++f) {
            parallel_results[f] = mbe::filter_labels(parallel_frames[f], labels[f], params);
        }
    });
    if (!same_verdicts(serial_results, parallel_results)) {
        std::fprintf(stderr, "FATAL: filter kernels disagree\n");
        return 1;
    }

    std::printf("%-18s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");
    std::printf("%-18s %12.1f %12.1f %8.2fx\n", "generate_corpus", gen_serial, gen_parallel,
                gen_serial / gen_parallel);
    std::printf("%-18s %12.1f %12.1f %8.2fx\n", "filter_labels", filter_serial, filter_parallel,
                filter_serial / filter_parallel);
    std::printf("\nresults identical across implementations\n");
    return 0;
}
