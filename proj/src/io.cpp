#include "colabel/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>

#include "json.hpp"

namespace colabel::io {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on " + path.string());
    return content;
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line, const std::string& what) {
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(std::string_view s, const fs::path& path, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        fail_at(path, line, "bad number '" + std::string(s) + "'");
    }
    return v;
}

std::uint64_t parse_u64(std::string_view s, const fs::path& path, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        fail_at(path, line, "bad integer '" + std::string(s) + "'");
    }
    return v;
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32le(std::string& out, float v) { put_u32le(out, std::bit_cast<std::uint32_t>(v)); }

void put_f64le(std::string& out, double v) { put_u64le(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

float get_f32le(const unsigned char* p) { return std::bit_cast<float>(get_u32le(p)); }

double get_f64le(const unsigned char* p) { return std::bit_cast<double>(get_u64le(p)); }

constexpr char kCloudMagic[8] = {'C', 'L', 'P', 'T', 'S', '\0', '\0', '\1'};
constexpr char kGridMagic[4] = {'F', 'G', 'R', 'D'};

constexpr std::string_view kLabelHeader = "frame_id,cx,cy,cz,l,w,h,yaw,score,origin";

ordered_json box_to_json(const geo::OrientedBox3& b) {
    return ordered_json::array({b.cx, b.cy, b.cz, b.l, b.w, b.h, b.yaw});
}

geo::OrientedBox3 box_from_json(const ordered_json& j, const fs::path& path, std::size_t line) {
    if (!j.is_array() || j.size() != 7) fail_at(path, line, "box must be a 7-element array");
    for (const auto& v : j) {
        if (!v.is_number()) fail_at(path, line, "box entries must be numbers");
    }
    try {
        return geo::OrientedBox3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                                 j[3].get<double>(), j[4].get<double>(), j[5].get<double>(),
                                 j[6].get<double>());
    } catch (const std::invalid_argument& e) {
        fail_at(path, line, e.what());
    }
}

std::string_view mode_name(eval::IouMode mode) {
    return mode == eval::IouMode::bev ? "bev" : "3d";
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed on " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string());
    }
}

std::string format_labels_csv(const std::vector<LabelRow>& rows) {
    std::string out{kLabelHeader};
    out += '\n';
    for (const LabelRow& row : rows) {
        const geo::OrientedBox3& b = row.label.box;
        out += std::to_string(row.frame_id);
        for (const double v : {b.cx, b.cy, b.cz, b.l, b.w, b.h, b.yaw, row.label.score}) {
            out += ',';
            out += fmt9(v);
        }
        out += ',';
        out += prelim::origin_name(row.label.origin);
        out += '\n';
    }
    return out;
}

void write_labels_csv(const fs::path& path, const std::vector<LabelRow>& rows) {
    write_file_atomic(path, format_labels_csv(rows));
}

std::vector<LabelRow> read_labels_csv(const fs::path& path) {
    const std::string content = read_file(path);
    std::vector<LabelRow> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        std::string_view line(content.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != kLabelHeader) fail_at(path, 1, "unexpected header");
            continue;
        }
        if (line.empty()) continue;
        const std::vector<std::string_view> f = split_fields(line);
        if (f.size() != 10) fail_at(path, line_no, "expected 10 fields");
        LabelRow row;
        row.frame_id = parse_u64(f[0], path, line_no);
        double v[8];
        for (int i = 0; i < 8; ++i) v[i] = parse_double(f[i + 1], path, line_no);
        try {
            row.label.box = geo::OrientedBox3(v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
        } catch (const std::invalid_argument& e) {
            fail_at(path, line_no, e.what());
        }
        row.label.score = v[7];
        const auto origin = prelim::origin_from_name(f[9]);
        if (!origin) fail_at(path, line_no, "unknown origin '" + std::string(f[9]) + "'");
        row.label.origin = *origin;
        rows.push_back(row);
    }
    return rows;
}

std::vector<std::vector<ScoredLabel>> group_labels(const std::vector<LabelRow>& rows,
                                                   const std::vector<scene::SceneFrame>& frames) {
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < frames.size(); ++i) index[frames[i].frame_id] = i;
    std::vector<std::vector<ScoredLabel>> grouped(frames.size());
    for (const LabelRow& row : rows) {
        const auto it = index.find(row.frame_id);
        if (it == index.end()) {
            throw ValidationError("label references unknown frame " +
                                  std::to_string(row.frame_id));
        }
        grouped[it->second].push_back(row.label);
    }
    return grouped;
}

void save_cloud(const fs::path& path, const geo::PointCloud& cloud) {
    std::string content;
    content.reserve(16 + 12 * cloud.size());
    content.append(kCloudMagic, sizeof(kCloudMagic));
    put_u64le(content, cloud.size());
    for (const geo::Vec3& p : cloud.points) {
        put_f32le(content, static_cast<float>(p.x));
        put_f32le(content, static_cast<float>(p.y));
        put_f32le(content, static_cast<float>(p.z));
    }
    write_file_atomic(path, content);
}

geo::PointCloud load_cloud(const fs::path& path) {
    const std::string content = read_file(path);
    if (content.size() < 16 || std::memcmp(content.data(), kCloudMagic, sizeof(kCloudMagic)) != 0) {
        throw ValidationError(path.string() + ": not a point cloud file");
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(content.data());
    const std::uint64_t count = get_u64le(bytes + 8);
    if (content.size() != 16 + 12 * count) {
        throw ValidationError(path.string() + ": truncated point data");
    }
    geo::PointCloud cloud;
    cloud.points.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* p = bytes + 16 + 12 * i;
        cloud.points.push_back(geo::Vec3{static_cast<double>(get_f32le(p)),
                                         static_cast<double>(get_f32le(p + 4)),
                                         static_cast<double>(get_f32le(p + 8))});
    }
    return cloud;
}

void write_scenes(const fs::path& jsonl_path, const std::vector<scene::SceneFrame>& frames) {
    fs::path dir = jsonl_path.parent_path();
    if (dir.empty()) dir = ".";
    std::error_code ec;
    fs::create_directories(dir / "pts", ec);
    if (ec) throw IoError("cannot create " + (dir / "pts").string());

    std::string jsonl;
    for (const scene::SceneFrame& f : frames) {
        ordered_json j;
        j["frame_id"] = f.frame_id;
        j["extent"] = f.extent;
        ordered_json agents = ordered_json::array();
        for (const scene::AgentPose& ap : f.agents) {
            agents.push_back(ordered_json{{"id", ap.agent_id}, {"box", box_to_json(ap.box)}});
        }
        j["agents"] = std::move(agents);
        ordered_json gt = ordered_json::array();
        for (const geo::OrientedBox3& b : f.gt_boxes) gt.push_back(box_to_json(b));
        j["gt"] = std::move(gt);
        ordered_json clouds = ordered_json::array();
        for (std::size_t a = 0; a < f.agents.size(); ++a) {
            char name[64];
            std::snprintf(name, sizeof(name), "pts/frame_%06llu_agent_%d.clpts",
                          static_cast<unsigned long long>(f.frame_id), f.agents[a].agent_id);
            save_cloud(dir / name, f.clouds[a]);
            clouds.push_back(ordered_json{{"agent", f.agents[a].agent_id}, {"pts_file", name}});
        }
        j["clouds"] = std::move(clouds);
        jsonl += j.dump();
        jsonl += '\n';
    }
    write_file_atomic(jsonl_path, jsonl);
}

std::vector<scene::SceneFrame> read_scenes(const fs::path& jsonl_path) {
    const std::string content = read_file(jsonl_path);
    fs::path dir = jsonl_path.parent_path();
    if (dir.empty()) dir = ".";

    std::vector<scene::SceneFrame> frames;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        const std::string_view line(content.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;

        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail_at(jsonl_path, line_no, e.what());
        }
        for (const char* key : {"frame_id", "extent", "agents", "gt", "clouds"}) {
            if (!j.contains(key)) fail_at(jsonl_path, line_no, std::string("missing key ") + key);
        }

        scene::SceneFrame f;
        f.frame_id = j["frame_id"].get<std::uint64_t>();
        if (!j["extent"].is_array() || j["extent"].size() != 4) {
            fail_at(jsonl_path, line_no, "extent must be a 4-element array");
        }
        for (std::size_t i = 0; i < 4; ++i) f.extent[i] = j["extent"][i].get<double>();

        for (const auto& entry : j["agents"]) {
            scene::AgentPose ap;
            ap.agent_id = entry.at("id").get<int>();
            ap.box = box_from_json(entry.at("box"), jsonl_path, line_no);
            f.agents.push_back(ap);
        }
        for (const auto& entry : j["gt"]) {
            f.gt_boxes.push_back(box_from_json(entry, jsonl_path, line_no));
        }
        // The file stores no object/agent tags; recover them by exact box
        // identity with the agent poses (values round-trip bit-exactly).
        for (const geo::OrientedBox3& b : f.gt_boxes) {
            int id = -1;
            for (const scene::AgentPose& ap : f.agents) {
                const geo::OrientedBox3& a = ap.box;
                if (a.cx == b.cx && a.cy == b.cy && a.cz == b.cz && a.l == b.l && a.w == b.w &&
                    a.h == b.h && a.yaw == b.yaw) {
                    id = ap.agent_id;
                    break;
                }
            }
            f.gt_agent_id.push_back(id);
        }

        if (j["clouds"].size() != f.agents.size()) {
            fail_at(jsonl_path, line_no, "need exactly one cloud per agent");
        }
        f.clouds.resize(f.agents.size());
        std::vector<bool> seen(f.agents.size(), false);
        for (const auto& entry : j["clouds"]) {
            const int agent_id = entry.at("agent").get<int>();
            std::size_t idx = f.agents.size();
            for (std::size_t a = 0; a < f.agents.size(); ++a) {
                if (f.agents[a].agent_id == agent_id) {
                    idx = a;
                    break;
                }
            }
            if (idx == f.agents.size()) {
                fail_at(jsonl_path, line_no, "cloud references unknown agent");
            }
            if (seen[idx]) fail_at(jsonl_path, line_no, "duplicate cloud for one agent");
            seen[idx] = true;
            f.clouds[idx] = load_cloud(dir / entry.at("pts_file").get<std::string>());
        }
        for (const geo::PointCloud& c : f.clouds) f.object_point_count.push_back(c.size());
        f.pose_errors.assign(f.agents.size(), {0.0, 0.0, 0.0});
        frames.push_back(std::move(f));
    }
    return frames;
}

void save_grid(const fs::path& path, const licl::FeatureGrid& grid) {
    std::string content;
    content.reserve(16 + 8 * grid.values.size());
    content.append(kGridMagic, sizeof(kGridMagic));
    put_u32le(content, static_cast<std::uint32_t>(grid.width));
    put_u32le(content, static_cast<std::uint32_t>(grid.height));
    put_u32le(content, static_cast<std::uint32_t>(grid.channels));
    for (const double v : grid.values) put_f64le(content, v);
    write_file_atomic(path, content);
}

licl::FeatureGrid load_grid(const fs::path& path, const scene::Extent& extent) {
    const std::string content = read_file(path);
    if (content.size() < 16 || std::memcmp(content.data(), kGridMagic, sizeof(kGridMagic)) != 0) {
        throw ValidationError(path.string() + ": not a feature grid file");
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(content.data());
    const std::uint32_t w = get_u32le(bytes + 4);
    const std::uint32_t h = get_u32le(bytes + 8);
    const std::uint32_t c = get_u32le(bytes + 12);
    const std::uint64_t n = static_cast<std::uint64_t>(w) * h * c;
    if (content.size() != 16 + 8 * n) {
        throw ValidationError(path.string() + ": truncated grid data");
    }
    licl::FeatureGrid grid = licl::FeatureGrid::zeros(w, h, c, extent);
    for (std::uint64_t i = 0; i < n; ++i) grid.values[i] = get_f64le(bytes + 16 + 8 * i);
    return grid;
}

std::string format_verdicts_json(const std::vector<std::uint64_t>& frame_ids,
                                 const std::vector<std::vector<mbe::QualityVerdict>>& verdicts) {
    ordered_json arr = ordered_json::array();
    for (std::size_t f = 0; f < verdicts.size(); ++f) {
        ordered_json frame;
        frame["frame_id"] = frame_ids[f];
        ordered_json labels = ordered_json::array();
        for (const mbe::QualityVerdict& v : verdicts[f]) {
            ordered_json jv;
            jv["label_index"] = v.label_index;
            jv["verdict"] = v.verdict == mbe::Verdict::high ? "high" : "low";
            jv["aggregated_r"] = v.aggregated_r ? ordered_json(*v.aggregated_r) : ordered_json();
            jv["aggregated_o"] = v.aggregated_o ? ordered_json(*v.aggregated_o) : ordered_json();
            ordered_json views = ordered_json::array();
            for (const mbe::EncodingTriple& t : v.per_view) {
                ordered_json jt;
                jt["view_id"] = t.view_id;
                jt["n_points"] = t.n_points;
                jt["r"] = t.r ? ordered_json(*t.r) : ordered_json();
                jt["o"] = t.o ? ordered_json(*t.o) : ordered_json();
                jt["d"] = t.d;
                views.push_back(std::move(jt));
            }
            jv["per_view"] = std::move(views);
            labels.push_back(std::move(jv));
        }
        frame["labels"] = std::move(labels);
        arr.push_back(std::move(frame));
    }
    return arr.dump(2) + "\n";
}

void write_verdicts_json(const fs::path& path, const std::vector<std::uint64_t>& frame_ids,
                         const std::vector<std::vector<mbe::QualityVerdict>>& verdicts) {
    write_file_atomic(path, format_verdicts_json(frame_ids, verdicts));
}

std::string format_sweep_csv(const eval::SweepResult& result) {
    std::string out = "param,value,recall,precision,tp,fp,fn\n";
    for (const eval::SweepRow& row : result.rows) {
        out += row.param + ',' + row.value + ',' + fmt6(row.recall) + ',' + fmt6(row.precision) +
               ',' + std::to_string(row.tp) + ',' + std::to_string(row.fp) + ',' +
               std::to_string(row.fn) + '\n';
    }
    return out;
}

std::string format_noise_csv(const eval::NoiseSweepResult& result) {
    std::string out = "sigma,seed,recall,precision\n";
    for (const eval::NoiseRow& row : result.rows) {
        out += fmt6(row.sigma) + ',' + std::to_string(row.seed) + ',' + fmt6(row.recall) + ',' +
               fmt6(row.precision) + '\n';
    }
    return out;
}

std::string format_histogram_csv(const eval::Histogram& hist) {
    std::string out = "bin_lo,bin_hi,count\n";
    const double n = static_cast<double>(hist.counts.size());
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out += fmt6(static_cast<double>(i) / n) + ',' + fmt6(static_cast<double>(i + 1) / n) +
               ',' + std::to_string(hist.counts[i]) + '\n';
    }
    out += "-1,-1," + std::to_string(hist.unmatched) + '\n';
    return out;
}

std::string format_report_csv(const eval::MatchReport& report, eval::IouMode mode) {
    std::string out = "iou_threshold,mode,recall,precision,tp,fp,fn\n";
    out += fmt6(report.iou_threshold) + ',' + std::string(mode_name(mode)) + ',' +
           fmt6(report.recall) + ',' + fmt6(report.precision) + ',' + std::to_string(report.tp) +
           ',' + std::to_string(report.fp) + ',' + std::to_string(report.fn) + '\n';
    return out;
}

void write_sweep_csv(const fs::path& path, const eval::SweepResult& result) {
    write_file_atomic(path, format_sweep_csv(result));
}

void write_noise_csv(const fs::path& path, const eval::NoiseSweepResult& result) {
    write_file_atomic(path, format_noise_csv(result));
}

void write_histogram_csv(const fs::path& path, const eval::Histogram& hist) {
    write_file_atomic(path, format_histogram_csv(hist));
}

void write_report_csv(const fs::path& path, const eval::MatchReport& report, eval::IouMode mode) {
    write_file_atomic(path, format_report_csv(report, mode));
}

}  // namespace colabel::io
