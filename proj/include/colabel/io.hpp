#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "colabel/eval.hpp"
#include "colabel/licl.hpp"
#include "colabel/mbe.hpp"
#include "colabel/prelim.hpp"
#include "colabel/scene.hpp"

namespace colabel::io {

using prelim::ScoredLabel;

/// Filesystem-level failure (cannot open/create/rename).
class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content; the message carries file and line context.
class ValidationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Writes content to path via a temp file in the same directory plus an
/// atomic rename, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// One label row as stored in CSV; frame_id ties the label to its frame.
struct LabelRow {
    std::uint64_t frame_id = 0;
    ScoredLabel label;
};

/// Label CSV: header "frame_id,cx,cy,cz,l,w,h,yaw,score,origin", 9
/// significant digits, LF endings. Write-read-write round-trips
/// byte-identically.
std::string format_labels_csv(const std::vector<LabelRow>& rows);
void write_labels_csv(const std::filesystem::path& path, const std::vector<LabelRow>& rows);
std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path);

/// Groups label rows frame-aligned with the given frames; throws
/// ValidationError when a row references an unknown frame_id.
std::vector<std::vector<ScoredLabel>> group_labels(const std::vector<LabelRow>& rows,
                                                   const std::vector<scene::SceneFrame>& frames);

/// Point cloud binary format: magic "CLPTS\0\0\1", then a little-endian
/// u64 point count, then count little-endian float32 xyz triples.
void save_cloud(const std::filesystem::path& path, const geo::PointCloud& cloud);
geo::PointCloud load_cloud(const std::filesystem::path& path);

/// Scene corpus: one JSON object per line with keys frame_id, extent,
/// agents, gt, clouds; each cloud entry references a CLPTS file relative to
/// the JSONL's directory (written under a pts/ subdirectory).
void write_scenes(const std::filesystem::path& jsonl_path,
                  const std::vector<scene::SceneFrame>& frames);
std::vector<scene::SceneFrame> read_scenes(const std::filesystem::path& jsonl_path);

/// Feature grid binary format: magic "FGRD", u32 width/height/channels,
/// then little-endian float64 values laid out x-fastest, then y, then
/// channel. The extent is not stored; the loader takes it as an argument.
void save_grid(const std::filesystem::path& path, const licl::FeatureGrid& grid);
licl::FeatureGrid load_grid(const std::filesystem::path& path, const scene::Extent& extent);

/// Verdict dump: JSON array with one object per frame; each label entry
/// carries its verdict, the confidence-weighted aggregates (null when no
/// view qualified), and the per-view triples.
std::string format_verdicts_json(const std::vector<std::uint64_t>& frame_ids,
                                 const std::vector<std::vector<mbe::QualityVerdict>>& verdicts);
void write_verdicts_json(const std::filesystem::path& path,
                         const std::vector<std::uint64_t>& frame_ids,
                         const std::vector<std::vector<mbe::QualityVerdict>>& verdicts);

/// CSV emitters for the evaluation artifacts; numbers use 6 significant
/// digits. Histogram rows are "bin_lo,bin_hi,count" with a trailing
/// "-1,-1,N" row counting unmatched labels.
std::string format_sweep_csv(const eval::SweepResult& result);
std::string format_noise_csv(const eval::NoiseSweepResult& result);
std::string format_histogram_csv(const eval::Histogram& hist);
std::string format_report_csv(const eval::MatchReport& report, eval::IouMode mode);
void write_sweep_csv(const std::filesystem::path& path, const eval::SweepResult& result);
void write_noise_csv(const std::filesystem::path& path, const eval::NoiseSweepResult& result);
void write_histogram_csv(const std::filesystem::path& path, const eval::Histogram& hist);
void write_report_csv(const std::filesystem::path& path, const eval::MatchReport& report,
                      eval::IouMode mode);

}  // namespace colabel::io
