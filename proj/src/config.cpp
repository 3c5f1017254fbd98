#include "colabel/config.hpp"

#include <charconv>
#include <fstream>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace colabel::config {

namespace {

// size_t and uint64_t fields share one variant alternative; they must be the
// same type for the registry pointers below to compile.
static_assert(std::is_same_v<std::size_t, std::uint64_t>);

struct Entry {
    std::string key;  // dotted "section.key"
    std::variant<double*, std::uint64_t*, bool*, std::string*> ptr;
};

/// One row per tunable; parse, override, and serialize all walk this table.
std::vector<Entry> registry(PipelineConfig& c) {
    return {
        {"scene.x_min", &c.scene.extent[0]},
        {"scene.x_max", &c.scene.extent[1]},
        {"scene.y_min", &c.scene.extent[2]},
        {"scene.y_max", &c.scene.extent[3]},
        {"scene.num_agents", &c.scene.num_agents},
        {"scene.num_objects", &c.scene.num_objects},
        {"scene.density", &c.scene.density},
        {"scene.sensor_height", &c.scene.sensor_height},
        {"scene.azimuth_bin", &c.scene.azimuth_bin},
        {"scene.placement_margin", &c.scene.placement_margin},
        {"scene.max_place_attempts", &c.scene.max_place_attempts},
        {"scene.ground_density", &c.scene.ground_density},
        {"scene.surface_inset", &c.scene.surface_inset},
        {"scene.len_lo", &c.scene.len_lo},
        {"scene.len_hi", &c.scene.len_hi},
        {"scene.wid_lo", &c.scene.wid_lo},
        {"scene.wid_hi", &c.scene.wid_hi},
        {"scene.hgt_lo", &c.scene.hgt_lo},
        {"scene.hgt_hi", &c.scene.hgt_hi},
        {"corpus.frames", &c.frames},
        {"corpus.seed", &c.seed},
        {"surrogate.p_detect", &c.surrogate.p_detect},
        {"surrogate.jitter_pos", &c.surrogate.jitter_pos},
        {"surrogate.jitter_size", &c.surrogate.jitter_size},
        {"surrogate.jitter_yaw", &c.surrogate.jitter_yaw},
        {"surrogate.fp_per_frame", &c.surrogate.fp_per_frame},
        {"surrogate.fp_iou_max", &c.surrogate.fp_iou_max},
        {"surrogate.clutter_frac", &c.surrogate.clutter_frac},
        {"surrogate.tp_score_a", &c.surrogate.tp_score_a},
        {"surrogate.tp_score_b", &c.surrogate.tp_score_b},
        {"surrogate.fp_score_a", &c.surrogate.fp_score_a},
        {"surrogate.fp_score_b", &c.surrogate.fp_score_b},
        {"surrogate.detect_agents", &c.surrogate.detect_agents},
        {"surrogate.seed", &c.surrogate.seed},
        {"surrogate.fp_len_lo", &c.surrogate.fp_len_lo},
        {"surrogate.fp_len_hi", &c.surrogate.fp_len_hi},
        {"surrogate.fp_wid_lo", &c.surrogate.fp_wid_lo},
        {"surrogate.fp_wid_hi", &c.surrogate.fp_wid_hi},
        {"surrogate.fp_hgt_lo", &c.surrogate.fp_hgt_lo},
        {"surrogate.fp_hgt_hi", &c.surrogate.fp_hgt_hi},
        {"surrogate.delta", &c.delta},
        {"mbe.eta_enlarge", &c.mbe.eta_enlarge},
        {"mbe.eta_reduce", &c.mbe.eta_reduce},
        {"mbe.phi_r", &c.mbe.phi_r},
        {"mbe.phi_o", &c.mbe.phi_o},
        {"mbe.n_min", &c.mbe.n_min},
        {"mbe.epsilon_d", &c.mbe.epsilon_d},
        {"licl.tau", &c.licl.tau},
        {"licl.gamma", &c.licl.gamma},
        {"licl.alpha", &c.licl.alpha},
        {"licl.beta", &c.licl.beta},
        {"licl.normalize_features", &c.licl.normalize_features},
        {"licl.textbook_variant", &c.licl.textbook_variant},
        {"licl.check_width", &c.check_width},
        {"licl.check_height", &c.check_height},
        {"licl.check_channels", &c.check_channels},
        {"licl.check_instances", &c.check_instances},
        {"eval.iou_threshold", &c.eval_iou_threshold},
        {"eval.mode", &c.eval_mode},
        {"eval.hist_bins", &c.hist_bins},
        {"noise.sigma_xy", &c.noise.sigma_xy},
        {"noise.sigma_yaw", &c.noise.sigma_yaw},
        {"noise.seed", &c.noise.seed},
        {"noise.seeds", &c.noise_seeds},
    };
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw ConfigError(context + ": " + what);
}

void set_entry(const Entry& entry, std::string_view value, const std::string& context) {
    const auto num = [&](auto* out) {
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), *out);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            fail(context, "bad value '" + std::string(value) + "' for " + entry.key);
        }
    };
    if (auto* d = std::get_if<double*>(&entry.ptr)) {
        num(*d);
    } else if (auto* u = std::get_if<std::uint64_t*>(&entry.ptr)) {
        num(*u);
    } else if (auto* b = std::get_if<bool*>(&entry.ptr)) {
        if (value == "true" || value == "1") {
            **b = true;
        } else if (value == "false" || value == "0") {
            **b = false;
        } else {
            fail(context, "bad boolean '" + std::string(value) + "' for " + entry.key);
        }
    } else {
        *std::get<std::string*>(entry.ptr) = std::string(value);
    }
}

std::string entry_to_string(const Entry& entry) {
    char buf[40];
    const auto chars = [&](auto v) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, ptr);
    };
    if (auto* d = std::get_if<double*>(&entry.ptr)) return chars(**d);
    if (auto* u = std::get_if<std::uint64_t*>(&entry.ptr)) return chars(**u);
    if (auto* b = std::get_if<bool*>(&entry.ptr)) return **b ? "true" : "false";
    return *std::get<std::string*>(entry.ptr);
}

void set_key(PipelineConfig& cfg, std::string_view dotted, std::string_view value,
             const std::string& context) {
    for (const Entry& entry : registry(cfg)) {
        if (entry.key == dotted) {
            set_entry(entry, value, context);
            return;
        }
    }
    fail(context, "unknown key '" + std::string(dotted) + "'");
}

}  // namespace

PipelineConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    PipelineConfig cfg;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string context = path.string() + ":" + std::to_string(line_no);
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) fail(context, "malformed section header");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos) fail(context, "expected key = value");
        const std::string_view key = trim(s.substr(0, eq));
        const std::string_view value = trim(s.substr(eq + 1));
        if (key.empty()) fail(context, "empty key");
        if (section.empty()) fail(context, "key outside any [section]");
        set_key(cfg, section + "." + std::string(key), value, context);
    }
    return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& assignment) {
    const std::string context = "override '" + assignment + "'";
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) fail(context, "expected section.key=value");
    const std::string_view key = trim(std::string_view(assignment).substr(0, eq));
    const std::string_view value = trim(std::string_view(assignment).substr(eq + 1));
    if (key.find('.') == std::string_view::npos) fail(context, "key must be section.key");
    set_key(cfg, key, value, context);
}

void validate(const PipelineConfig& cfg) {
    const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (cfg.frames == 0) throw ConfigError("corpus.frames must be at least 1");
    if (!in01(cfg.delta)) throw ConfigError("surrogate.delta must be in [0, 1]");
    if (!in01(cfg.surrogate.p_detect)) throw ConfigError("surrogate.p_detect must be in [0, 1]");
    if (!(cfg.mbe.eta_enlarge > 0.0)) throw ConfigError("mbe.eta_enlarge must be positive");
    if (!(cfg.mbe.eta_reduce > 0.0 && cfg.mbe.eta_reduce < 1.0)) {
        throw ConfigError("mbe.eta_reduce must be in (0, 1)");
    }
    if (!(cfg.mbe.phi_r > 0.0)) throw ConfigError("mbe.phi_r must be positive");
    if (!in01(cfg.mbe.phi_o)) throw ConfigError("mbe.phi_o must be in [0, 1]");
    if (!(cfg.mbe.epsilon_d > 0.0)) throw ConfigError("mbe.epsilon_d must be positive");
    if (!(cfg.licl.tau > 0.0)) throw ConfigError("licl.tau must be positive");
    if (!(cfg.eval_iou_threshold > 0.0 && cfg.eval_iou_threshold < 1.0)) {
        throw ConfigError("eval.iou_threshold must be in (0, 1)");
    }
    if (cfg.eval_mode != "bev" && cfg.eval_mode != "3d") {
        throw ConfigError("eval.mode must be 'bev' or '3d'");
    }
    if (cfg.hist_bins == 0) throw ConfigError("eval.hist_bins must be at least 1");
    if (!(cfg.noise.sigma_xy >= 0.0 && cfg.noise.sigma_yaw >= 0.0)) {
        throw ConfigError("noise sigmas must be non-negative");
    }
    if (cfg.noise_seeds == 0) throw ConfigError("noise.seeds must be at least 1");
    if (!(cfg.scene.surface_inset >= 0.0)) {
        throw ConfigError("scene.surface_inset must be non-negative");
    }
}

std::string serialize(const PipelineConfig& cfg) {
    // The registry is grouped by section in declaration order, so emitting a
    // header whenever the prefix changes yields a well-formed file.
    std::string out;
    std::string section;
    for (const Entry& entry : registry(const_cast<PipelineConfig&>(cfg))) {
        const std::size_t dot = entry.key.find('.');
        const std::string sec = entry.key.substr(0, dot);
        if (sec != section) {
            if (!out.empty()) out += '\n';
            out += '[' + sec + "]\n";
            section = sec;
        }
        out += entry.key.substr(dot + 1) + " = " + entry_to_string(entry) + '\n';
    }
    return out;
}

eval::IouMode eval_mode_enum(const PipelineConfig& cfg) {
    if (cfg.eval_mode == "bev") return eval::IouMode::bev;
    if (cfg.eval_mode == "3d") return eval::IouMode::three_d;
    throw ConfigError("eval.mode must be 'bev' or '3d'");
}

eval::CorpusSpec to_corpus_spec(const PipelineConfig& cfg) {
    eval::CorpusSpec spec;
    spec.scene = cfg.scene;
    spec.frames = cfg.frames;
    spec.seed = cfg.seed;
    spec.surrogate = cfg.surrogate;
    spec.delta = cfg.delta;
    return spec;
}

}  // namespace colabel::config
