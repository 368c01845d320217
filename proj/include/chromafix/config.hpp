#pragma once

#include "chromafix/image.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace chromafix {

// Every tunable of the correction pipeline.
struct PipelineConfig {
    ChannelId reference = ChannelId::Green;
    int window_radius = 7;
    int search_radius = 8;
    bool joint_search = true;
    int keypoint_count = 96;
    int cell_grid = 4;
    double grad_percentile = 60.0;
    double sat_threshold = 0.99;
    std::optional<int> sat_dilation;  // unset: follows window_radius
    double l_max = 0.01;
    bool use_l_weighting = false;
    std::uint64_t seed = 0;
    int border_crop = 16;

    int effective_sat_dilation() const noexcept { return sat_dilation.value_or(window_radius); }

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Field names accepted in config files and as CLI flags.
const std::vector<std::string>& config_field_names();

// Every violated invariant, one message per field; empty when valid.
std::vector<std::string> config_violations(const PipelineConfig& cfg);
// Throws Validation listing all violations.
void validate(const PipelineConfig& cfg);

nlohmann::json config_to_json(const PipelineConfig& cfg);
// Applies the fields present in `overrides` on top of `cfg`. Unknown fields and
// wrong types throw Parse naming the field. `source` prefixes messages.
void apply_overrides(PipelineConfig& cfg, const nlohmann::json& overrides, const std::string& source);

// Defaults, then the JSON file (if any), then `flag_overrides`; validated.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const nlohmann::json& flag_overrides = nlohmann::json::object());
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace chromafix
