#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "colabel/eval.hpp"
#include "colabel/licl.hpp"
#include "colabel/mbe.hpp"
#include "colabel/prelim.hpp"
#include "colabel/scene.hpp"

namespace colabel::config {

/// Bad configuration file or override (maps to exit code 2).
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Every tunable of the pipeline, one section per module. Defaults document
/// the reference setup; any key can be overridden per run.
struct PipelineConfig {
    scene::SceneConfig scene;

    // [corpus]
    std::size_t frames = 100;
    std::uint64_t seed = 1;

    prelim::SurrogateConfig surrogate;
    double delta = 0.01;  // confidence threshold on preliminary labels

    mbe::MbeParams mbe;

    licl::LiclParams licl;
    // gradient-check protocol (licl-check command)
    std::size_t check_width = 12, check_height = 10, check_channels = 8;
    std::size_t check_instances = 50;

    // [eval]
    double eval_iou_threshold = 0.5;
    std::string eval_mode = "bev";  // "bev" or "3d"
    std::size_t hist_bins = 20;

    // [noise]
    scene::NoiseModel noise;
    std::size_t noise_seeds = 10;  // seeds per sigma in the noise sweep

    // In the pipeline the agents' own poses enter as explicit shared labels,
    // so the detector surrogate only covers the sensorless objects.
    PipelineConfig() { surrogate.detect_agents = false; }
};

/// Parses an INI-style file ([section] headers, key = value lines, '#'
/// comments) over the defaults. Unknown keys and malformed lines throw
/// ConfigError with file:line context.
PipelineConfig parse_config_file(const std::filesystem::path& path);

/// Applies one "section.key=value" override in place.
void apply_override(PipelineConfig& cfg, const std::string& assignment);

/// Cross-field validation (ranges, enum values); throws ConfigError.
void validate(const PipelineConfig& cfg);

/// Serializes every key so the result parses back to an equal config; used
/// for the resolved-config snapshot written next to outputs.
std::string serialize(const PipelineConfig& cfg);

eval::IouMode eval_mode_enum(const PipelineConfig& cfg);

/// Corpus recipe corresponding to this config.
eval::CorpusSpec to_corpus_spec(const PipelineConfig& cfg);

}  // namespace colabel::config
