#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "colabel/config.hpp"
#include "colabel/io.hpp"
#include "colabel/licl.hpp"
#include "colabel/mbe.hpp"
#include "colabel/rng.hpp"

namespace fs = std::filesystem;
using namespace colabel;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 0;
};

config::PipelineConfig load_config(const GlobalArgs& args) {
    config::PipelineConfig cfg;
    if (!args.config_path.empty()) cfg = config::parse_config_file(args.config_path);
    for (const std::string& assignment : args.overrides) config::apply_override(cfg, assignment);
    config::validate(cfg);
    return cfg;
}

void apply_threads(const GlobalArgs& args) {
    int threads = 0;
    if (const char* env = std::getenv("COLABEL_THREADS")) threads = std::atoi(env);
    if (args.threads > 0) threads = args.threads;
    if (threads > 0) omp_set_num_threads(threads);
}

/// Resolved-config snapshot written next to every command's outputs.
void echo_config(const config::PipelineConfig& cfg, const fs::path& anchor, bool anchor_is_dir) {
    const fs::path target =
        anchor_is_dir ? anchor / "resolved_config.ini" : fs::path(anchor.string() + ".config.ini");
    io::write_file_atomic(target, config::serialize(cfg));
}

eval::Corpus build_corpus(const config::PipelineConfig& cfg) {
    const eval::CorpusSpec spec = config::to_corpus_spec(cfg);
    if (cfg.noise.sigma_xy > 0.0 || cfg.noise.sigma_yaw > 0.0) {
        return eval::make_noisy_corpus(spec, cfg.noise);
    }
    return eval::make_corpus(spec);
}

std::vector<io::LabelRow> to_rows(const std::vector<scene::SceneFrame>& frames,
                                  const std::vector<std::vector<prelim::ScoredLabel>>& labels) {
    std::vector<io::LabelRow> rows;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        for (const prelim::ScoredLabel& label : labels[f]) {
            rows.push_back(io::LabelRow{frames[f].frame_id, label});
        }
    }
    return rows;
}

int cmd_gen(const config::PipelineConfig& cfg, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io::IoError("cannot create " + out_dir);
    std::vector<scene::SceneFrame> frames = scene::generate_corpus(cfg.scene, cfg.frames, cfg.seed);
    if (cfg.noise.sigma_xy > 0.0 || cfg.noise.sigma_yaw > 0.0) {
        for (scene::SceneFrame& f : frames) f = scene::apply_localization_noise(f, cfg.noise);
    }
    io::write_scenes(fs::path(out_dir) / "scenes.jsonl", frames);
    echo_config(cfg, out_dir, true);
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return 0;
}

int cmd_prelim(const config::PipelineConfig& cfg, const std::string& scenes_path,
               const std::string& out_path) {
    const std::vector<scene::SceneFrame> frames = io::read_scenes(scenes_path);
    std::vector<std::vector<prelim::ScoredLabel>> labels(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        std::vector<prelim::ScoredLabel> all = prelim::agent_labels(frames[f]);
        const std::vector<prelim::ScoredLabel> detected =
            prelim::surrogate_detect(frames[f], cfg.surrogate);
        all.insert(all.end(), detected.begin(), detected.end());
        labels[f] = prelim::threshold_filter(all, cfg.delta);
    }
    io::write_labels_csv(out_path, to_rows(frames, labels));
    echo_config(cfg, out_path, false);
    std::cout << "wrote preliminary labels to " << out_path << "\n";
    return 0;
}

int cmd_filter(const config::PipelineConfig& cfg, const std::string& scenes_path,
               const std::string& labels_path, const std::string& out_high,
               const std::string& out_low, const std::string& out_verdicts) {
    const std::vector<scene::SceneFrame> frames = io::read_scenes(scenes_path);
    const std::vector<std::vector<prelim::ScoredLabel>> labels =
        io::group_labels(io::read_labels_csv(labels_path), frames);

    std::vector<std::vector<prelim::ScoredLabel>> high(frames.size()), low(frames.size());
    std::vector<std::vector<mbe::QualityVerdict>> verdicts(frames.size());
    std::vector<std::uint64_t> frame_ids(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        mbe::FilterResult result = mbe::filter_labels(frames[f], labels[f], cfg.mbe);
        high[f] = std::move(result.high);
        low[f] = std::move(result.low);
        verdicts[f] = std::move(result.verdicts);
        frame_ids[f] = frames[f].frame_id;
    }
    io::write_labels_csv(out_high, to_rows(frames, high));
    io::write_labels_csv(out_low, to_rows(frames, low));
    if (!out_verdicts.empty()) io::write_verdicts_json(out_verdicts, frame_ids, verdicts);
    echo_config(cfg, out_high, false);
    std::size_t n_high = 0, n_low = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        n_high += high[f].size();
        n_low += low[f].size();
    }
    std::cout << "kept " << n_high << " high-quality labels, demoted " << n_low << "\n";
    return 0;
}

int cmd_eval(const config::PipelineConfig& cfg, const std::string& scenes_path,
             const std::string& labels_path, const std::string& out_path,
             const std::string& hist_path) {
    const std::vector<scene::SceneFrame> frames = io::read_scenes(scenes_path);
    const std::vector<std::vector<prelim::ScoredLabel>> labels =
        io::group_labels(io::read_labels_csv(labels_path), frames);
    const eval::IouMode mode = config::eval_mode_enum(cfg);

    const eval::MatchReport report =
        eval::evaluate_corpus(frames, labels, cfg.eval_iou_threshold, mode);
    io::write_report_csv(out_path, report, mode);
    if (!hist_path.empty()) {
        eval::Histogram total;
        total.counts.assign(cfg.hist_bins, 0);
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const eval::Histogram h =
                eval::iou_histogram(labels[f], frames[f].gt_boxes, cfg.hist_bins, mode);
            for (std::size_t b = 0; b < cfg.hist_bins; ++b) total.counts[b] += h.counts[b];
            total.unmatched += h.unmatched;
        }
        io::write_histogram_csv(hist_path, total);
    }
    echo_config(cfg, out_path, false);
    std::printf("recall %.6g  precision %.6g  (tp %zu, fp %zu, fn %zu)\n", report.recall,
                report.precision, report.tp, report.fp, report.fn);
    return 0;
}

int cmd_sweep(const config::PipelineConfig& cfg, const std::string& kind,
              const std::string& out_path) {
    const eval::IouMode mode = config::eval_mode_enum(cfg);
    if (kind == "noise") {
        const eval::NoiseSweepResult result =
            eval::sweep_noise(config::to_corpus_spec(cfg), eval::kSigmaGrid, cfg.noise_seeds,
                              cfg.noise.seed, cfg.mbe, cfg.eval_iou_threshold, mode);
        io::write_noise_csv(out_path, result);
    } else {
        const eval::Corpus corpus = build_corpus(cfg);
        eval::SweepResult result;
        if (kind == "phi") {
            result = eval::sweep_mbe(corpus, eval::kPhiRGrid, eval::kPhiOGrid, {}, cfg.mbe,
                                     cfg.eval_iou_threshold, mode);
        } else if (kind == "eta") {
            result = eval::sweep_mbe(corpus, {}, {}, eval::kEtaGrid, cfg.mbe,
                                     cfg.eval_iou_threshold, mode);
        } else if (kind == "delta") {
            result = eval::sweep_delta(corpus, eval::kDeltaGrid, cfg.eval_iou_threshold, mode);
        } else {
            throw config::ConfigError("unknown sweep kind '" + kind +
                                      "' (expected phi, eta, delta, or noise)");
        }
        io::write_sweep_csv(out_path, result);
    }
    echo_config(cfg, out_path, false);
    std::cout << "wrote " << kind << " sweep to " << out_path << "\n";
    return 0;
}

int cmd_licl_check(const config::PipelineConfig& cfg, const std::string& out_path) {
    const double fd_step = 1e-5;
    const double tolerance = 1e-4;
    double max_err = 0.0;
    std::size_t untouched_nonzero = 0;

    for (std::size_t inst = 0; inst < cfg.check_instances; ++inst) {
        rng::Xoshiro256pp rng =
            rng::Xoshiro256pp::derive(cfg.seed, {inst, rng::streams::kGradCheck});
        licl::FeatureGrid grid = licl::FeatureGrid::zeros(cfg.check_width, cfg.check_height,
                                                          cfg.check_channels, cfg.scene.extent);
        for (double& v : grid.values) v = rng.gaussian();

        const auto draw_boxes = [&](std::size_t count) {
            std::vector<geo::OrientedBox3> boxes;
            for (std::size_t i = 0; i < count; ++i) {
                const double x = rng.uniform(cfg.scene.extent[0], cfg.scene.extent[1]);
                const double y = rng.uniform(cfg.scene.extent[2], cfg.scene.extent[3]);
                boxes.emplace_back(x, y, 0.75, 4.5, 1.9, 1.5, rng.uniform(-M_PI, M_PI));
            }
            return boxes;
        };
        const std::vector<geo::OrientedBox3> pos = draw_boxes(1 + rng.uniform_int(4));
        const std::vector<geo::OrientedBox3> neg = draw_boxes(1 + rng.uniform_int(6));

        const licl::FeatureGrid grad = licl::licl_grad(grid, pos, neg, cfg.licl);

        std::vector<bool> touched(grid.values.size(), false);
        for (const auto& boxes : {pos, neg}) {
            for (const geo::OrientedBox3& b : boxes) {
                const auto [gx, gy] = licl::grid_index(b, grid);
                for (std::size_t c = 0; c < grid.channels; ++c) {
                    touched[(c * grid.height + gy) * grid.width + gx] = true;
                }
            }
        }
        for (std::size_t i = 0; i < grid.values.size(); ++i) {
            if (!touched[i]) {
                if (grad.values[i] != 0.0) ++untouched_nonzero;
                continue;
            }
            licl::FeatureGrid bumped = grid;
            bumped.values[i] = grid.values[i] + fd_step;
            const double up = licl::licl_loss(bumped, pos, neg, cfg.licl);
            bumped.values[i] = grid.values[i] - fd_step;
            const double down = licl::licl_loss(bumped, pos, neg, cfg.licl);
            const double fd = (up - down) / (2.0 * fd_step);
            max_err = std::max(max_err, std::abs(fd - grad.values[i]));
        }
    }

    const bool pass = max_err < tolerance && untouched_nonzero == 0;
    char report[512];
    std::snprintf(report, sizeof(report),
                  "contrastive gradient check\n"
                  "grid: %zux%zux%zu\n"
                  "instances: %zu (tau=%g, normalize=%s, variant=%s)\n"
                  "max_abs_error: %.6g (tolerance %g)\n"
                  "untouched_nonzero: %zu\n"
                  "result: %s\n",
                  cfg.check_width, cfg.check_height, cfg.check_channels, cfg.check_instances,
                  cfg.licl.tau, cfg.licl.normalize_features ? "true" : "false",
                  cfg.licl.textbook_variant ? "textbook" : "shipped", max_err, tolerance,
                  untouched_nonzero, pass ? "PASS" : "FAIL");
    std::cout << report;
    if (!out_path.empty()) {
        io::write_file_atomic(out_path, report);
        echo_config(cfg, out_path, false);
    }
    return pass ? 0 : 4;
}

// ---------------------------------------------------------------------------
// plot: minimal SVG renderings of the CSV artifacts (no external renderer).

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io::IoError("cannot open " + path);
    Csv csv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (csv.header.empty()) {
            csv.header = std::move(fields);
        } else {
            csv.rows.push_back(std::move(fields));
        }
    }
    if (csv.header.empty()) throw io::ValidationError(path + ": empty CSV");
    return csv;
}

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

constexpr double kW = 640, kH = 420, kMargin = 60;

double sx(double t) { return kMargin + t * (kW - 2 * kMargin); }   // t in [0,1]
double sy(double t) { return kH - kMargin - t * (kH - 2 * kMargin); }

void svg_open(std::string& s) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(kW) + "\" height=\"" +
         svg_num(kH) + "\" viewBox=\"0 0 " + svg_num(kW) + " " + svg_num(kH) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    s += "<line x1=\"" + svg_num(sx(0)) + "\" y1=\"" + svg_num(sy(0)) + "\" x2=\"" +
         svg_num(sx(1)) + "\" y2=\"" + svg_num(sy(0)) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + svg_num(sx(0)) + "\" y1=\"" + svg_num(sy(0)) + "\" x2=\"" +
         svg_num(sx(0)) + "\" y2=\"" + svg_num(sy(1)) + "\" stroke=\"black\"/>\n";
}

void svg_text(std::string& s, double x, double y, const std::string& text,
              const std::string& extra = "") {
    s += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) +
         "\" font-family=\"sans-serif\" font-size=\"11\"" + extra + ">" + text + "</text>\n";
}

void svg_polyline(std::string& s, const std::vector<std::pair<double, double>>& pts,
                  const std::string& color, bool dashed) {
    s += "<polyline fill=\"none\" stroke=\"" + color + "\"";
    if (dashed) s += " stroke-dasharray=\"5,3\"";
    s += " points=\"";
    for (const auto& [x, y] : pts) s += svg_num(x) + "," + svg_num(y) + " ";
    s += "\"/>\n";
}

const std::vector<std::string> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string plot_sweep(const Csv& csv) {
    // One x slot per row within its param group; recall solid, precision dashed.
    std::map<std::string, std::vector<std::size_t>> groups;
    std::vector<std::string> group_order;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        if (!groups.count(csv.rows[i][0])) group_order.push_back(csv.rows[i][0]);
        groups[csv.rows[i][0]].push_back(i);
    }
    std::size_t max_len = 1;
    for (const auto& [_, idx] : groups) max_len = std::max(max_len, idx.size());

    std::string s;
    svg_open(s);
    std::size_t gi = 0;
    for (const std::string& name : group_order) {
        const std::vector<std::size_t>& idx = groups[name];
        const std::string& color = kColors[gi % kColors.size()];
        std::vector<std::pair<double, double>> recall, precision;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const double t = max_len > 1 ? static_cast<double>(k) / (max_len - 1) : 0.5;
            recall.emplace_back(sx(t), sy(std::stod(csv.rows[idx[k]][2])));
            precision.emplace_back(sx(t), sy(std::stod(csv.rows[idx[k]][3])));
            svg_text(s, sx(t) - 10, sy(0) + 14 + 12 * (gi % 2), csv.rows[idx[k]][1],
                     " fill=\"" + color + "\"");
        }
        svg_polyline(s, recall, color, false);
        svg_polyline(s, precision, color, true);
        svg_text(s, sx(0) + 8, kMargin - 8 + 13 * gi, name + " (recall solid, precision dashed)",
                 " fill=\"" + color + "\"");
        ++gi;
    }
    for (const double y : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg_text(s, 8, sy(y) + 4, svg_num(y));
    }
    s += "</svg>\n";
    return s;
}

std::string plot_noise(const Csv& csv) {
    std::vector<std::string> sigma_order;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_sigma;
    for (const auto& row : csv.rows) {
        if (!by_sigma.count(row[0])) sigma_order.push_back(row[0]);
        by_sigma[row[0]].first.push_back(std::stod(row[2]));
        by_sigma[row[0]].second.push_back(std::stod(row[3]));
    }
    const std::size_t n = sigma_order.size();
    std::string s;
    svg_open(s);
    std::vector<std::pair<double, double>> recall, precision;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.5;
        const auto& [rs, ps] = by_sigma[sigma_order[i]];
        double mr = 0, mp = 0;
        for (const double v : rs) mr += v;
        for (const double v : ps) mp += v;
        mr /= rs.size();
        mp /= ps.size();
        recall.emplace_back(sx(t), sy(mr));
        precision.emplace_back(sx(t), sy(mp));
        for (const double v : ps) {
            s += "<circle cx=\"" + svg_num(sx(t)) + "\" cy=\"" + svg_num(sy(v)) +
                 "\" r=\"2\" fill=\"#d6272855\"/>\n";
        }
        svg_text(s, sx(t) - 10, sy(0) + 14, sigma_order[i]);
    }
    svg_polyline(s, recall, kColors[0], false);
    svg_polyline(s, precision, kColors[1], false);
    svg_text(s, sx(0) + 8, kMargin - 8, "mean recall", " fill=\"" + kColors[0] + "\"");
    svg_text(s, sx(0) + 8, kMargin + 5, "mean precision (dots: per seed)",
             " fill=\"" + kColors[1] + "\"");
    svg_text(s, kW / 2 - 10, kH - 14, "sigma");
    for (const double y : {0.0, 0.25, 0.5, 0.75, 1.0}) svg_text(s, 8, sy(y) + 4, svg_num(y));
    s += "</svg>\n";
    return s;
}

std::string plot_histogram(const Csv& csv) {
    std::vector<std::pair<std::string, double>> bars;  // label, count
    double unmatched = 0.0;
    double max_count = 1.0;
    for (const auto& row : csv.rows) {
        if (row[0] == "-1") {
            unmatched = std::stod(row[2]);
            continue;
        }
        bars.emplace_back(row[0], std::stod(row[2]));
        max_count = std::max(max_count, bars.back().second);
    }
    std::string s;
    svg_open(s);
    const double slot = 1.0 / std::max<std::size_t>(bars.size(), 1);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double x0 = sx(i * slot), x1 = sx((i + 0.9) * slot);
        const double y0 = sy(0), y1 = sy(bars[i].second / max_count);
        s += "<rect x=\"" + svg_num(x0) + "\" y=\"" + svg_num(y1) + "\" width=\"" +
             svg_num(x1 - x0) + "\" height=\"" + svg_num(y0 - y1) + "\" fill=\"" + kColors[0] +
             "\"/>\n";
        if (i % 2 == 0) svg_text(s, x0 - 4, sy(0) + 14, bars[i].first);
    }
    svg_text(s, sx(0) + 8, kMargin - 8, "IoU histogram (unmatched: " + svg_num(unmatched) + ")");
    svg_text(s, 8, sy(1) + 4, svg_num(max_count));
    svg_text(s, 8, sy(0) + 4, "0");
    s += "</svg>\n";
    return s;
}

int cmd_plot(const std::string& in_path, const std::string& out_path) {
    const Csv csv = read_csv(in_path);
    const std::string head = [&] {
        std::string h;
        for (std::size_t i = 0; i < csv.header.size(); ++i) {
            if (i) h += ',';
            h += csv.header[i];
        }
        return h;
    }();
    std::string svg;
    if (head == "param,value,recall,precision,tp,fp,fn") {
        svg = plot_sweep(csv);
    } else if (head == "sigma,seed,recall,precision") {
        svg = plot_noise(csv);
    } else if (head == "bin_lo,bin_hi,count") {
        svg = plot_histogram(csv);
    } else {
        throw io::ValidationError(in_path + ": no plot for header '" + head + "'");
    }
    io::write_file_atomic(out_path, svg);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"cooperative multi-view label pipeline"};
    app.require_subcommand(1);
    GlobalArgs g;
    app.add_option("--config", g.config_path, "configuration file (INI-style)");
    app.add_option("--set", g.overrides, "override a key: section.key=value")
        ->take_all()
        ->allow_extra_args(false);
    app.add_option("--threads", g.threads, "worker threads (overrides COLABEL_THREADS)");

    std::string out, scenes, labels, out_low, out_verdicts, hist, kind, in_path;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic scene corpus");
    gen->fallthrough();
    gen->add_option("--out", out, "output directory")->required();

    CLI::App* prelim_cmd = app.add_subcommand("prelim", "produce preliminary labels");
    prelim_cmd->fallthrough();
    prelim_cmd->add_option("--scenes", scenes, "scene JSONL")->required();
    prelim_cmd->add_option("--out", out, "label CSV to write")->required();

    CLI::App* filter = app.add_subcommand("filter", "split labels into high/low quality");
    filter->fallthrough();
    filter->add_option("--scenes", scenes, "scene JSONL")->required();
    filter->add_option("--labels", labels, "label CSV to filter")->required();
    filter->add_option("--out-high", out, "high-quality label CSV")->required();
    filter->add_option("--out-low", out_low, "low-quality label CSV")->required();
    filter->add_option("--out-verdicts", out_verdicts, "verdict JSON dump (optional)");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score labels against ground truth");
    eval_cmd->fallthrough();
    eval_cmd->add_option("--scenes", scenes, "scene JSONL")->required();
    eval_cmd->add_option("--labels", labels, "label CSV to score")->required();
    eval_cmd->add_option("--out", out, "report CSV")->required();
    eval_cmd->add_option("--hist", hist, "also write an IoU histogram CSV");

    CLI::App* sweep = app.add_subcommand("sweep", "parameter study (phi, eta, delta, noise)");
    sweep->fallthrough();
    sweep->add_option("kind", kind, "phi | eta | delta | noise")->required();
    sweep->add_option("--out", out, "sweep CSV")->required();

    CLI::App* licl_check = app.add_subcommand("licl-check", "verify contrastive gradients");
    licl_check->fallthrough();
    licl_check->add_option("--out", out, "also write the report to this file");

    CLI::App* plot = app.add_subcommand("plot", "render a CSV artifact as SVG");
    plot->fallthrough();
    plot->add_option("--in", in_path, "CSV produced by eval or sweep")->required();
    plot->add_option("--out", out, "SVG to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    apply_threads(g);
    if (plot->parsed()) return cmd_plot(in_path, out);  // plot takes no config

    const config::PipelineConfig cfg = load_config(g);
    if (gen->parsed()) return cmd_gen(cfg, out);
    if (prelim_cmd->parsed()) return cmd_prelim(cfg, scenes, out);
    if (filter->parsed()) return cmd_filter(cfg, scenes, labels, out, out_low, out_verdicts);
    if (eval_cmd->parsed()) return cmd_eval(cfg, scenes, labels, out, hist);
    if (sweep->parsed()) return cmd_sweep(cfg, kind, out);
    if (licl_check->parsed()) return cmd_licl_check(cfg, out);
    return 2;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const io::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const io::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
