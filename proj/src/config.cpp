#include "chromafix/config.hpp"

#include "chromafix/error.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

namespace chromafix {

using nlohmann::json;

const std::vector<std::string>& config_field_names()
{
    static const std::vector<std::string> names{
        "reference",    "window_radius", "search_radius", "joint_search",    "keypoint_count",
        "cell_grid",    "grad_percentile", "sat_threshold", "sat_dilation", "l_max",
        "use_l_weighting", "seed",       "border_crop",
    };
    return names;
}

std::vector<std::string> config_violations(const PipelineConfig& cfg)
{
    std::vector<std::string> out;
    if (cfg.window_radius < 1) out.push_back("window_radius must be >= 1 (got " + std::to_string(cfg.window_radius) + ")");
    if (cfg.search_radius < 1) out.push_back("search_radius must be >= 1 (got " + std::to_string(cfg.search_radius) + ")");
    if (cfg.keypoint_count < 2) {
        out.push_back("keypoint_count must be >= 2: a scale-plus-translation fit needs at least 2 keypoints (got " +
                      std::to_string(cfg.keypoint_count) + ")");
    }
    if (cfg.cell_grid < 1) out.push_back("cell_grid must be >= 1 (got " + std::to_string(cfg.cell_grid) + ")");
    if (!(cfg.grad_percentile >= 0.0 && cfg.grad_percentile <= 100.0)) {
        out.push_back("grad_percentile must lie in [0, 100] (got " + std::to_string(cfg.grad_percentile) + ")");
    }
    if (!(cfg.sat_threshold > 0.0 && cfg.sat_threshold <= 1.0)) {
        out.push_back("sat_threshold must lie in (0, 1] (got " + std::to_string(cfg.sat_threshold) + ")");
    }
    if (cfg.sat_dilation && *cfg.sat_dilation < 0) {
        out.push_back("sat_dilation must be >= 0 (got " + std::to_string(*cfg.sat_dilation) + ")");
    }
    if (!(cfg.l_max > 0.0 && cfg.l_max <= 1.0)) {
        out.push_back("l_max must lie in (0, 1] (got " + std::to_string(cfg.l_max) + ")");
    }
    if (cfg.border_crop < 0) out.push_back("border_crop must be >= 0 (got " + std::to_string(cfg.border_crop) + ")");
    return out;
}

void validate(const PipelineConfig& cfg)
{
    const auto problems = config_violations(cfg);
    if (problems.empty()) return;
    std::string message;
    for (const auto& p : problems) {
        if (!message.empty()) message += "; ";
        message += p;
    }
    throw Error(ErrorKind::Validation, message);
}

json config_to_json(const PipelineConfig& cfg)
{
    json j;
    j["reference"] = std::string(to_string(cfg.reference));
    j["window_radius"] = cfg.window_radius;
    j["search_radius"] = cfg.search_radius;
    j["joint_search"] = cfg.joint_search;
    j["keypoint_count"] = cfg.keypoint_count;
    j["cell_grid"] = cfg.cell_grid;
    j["grad_percentile"] = cfg.grad_percentile;
    j["sat_threshold"] = cfg.sat_threshold;
    j["sat_dilation"] = cfg.sat_dilation ? json(*cfg.sat_dilation) : json(nullptr);
    j["l_max"] = cfg.l_max;
    j["use_l_weighting"] = cfg.use_l_weighting;
    j["seed"] = cfg.seed;
    j["border_crop"] = cfg.border_crop;
    return j;
}

namespace {

[[noreturn]] void bad_type(const std::string& source, const std::string& field, const char* expected)
{
    throw Error(ErrorKind::Parse, source + ": field '" + field + "' must be " + expected);
}

int as_int(const json& v, const std::string& source, const std::string& field)
{
    if (!v.is_number_integer()) bad_type(source, field, "an integer");
    const auto x = v.get<long long>();
    if (x < -(1LL << 31) || x > (1LL << 31) - 1) bad_type(source, field, "a 32-bit integer");
    return static_cast<int>(x);
}

double as_double(const json& v, const std::string& source, const std::string& field)
{
    if (!v.is_number()) bad_type(source, field, "a number");
    return v.get<double>();
}

bool as_bool(const json& v, const std::string& source, const std::string& field)
{
    if (!v.is_boolean()) bad_type(source, field, "true or false");
    return v.get<bool>();
}

}  // namespace

void apply_overrides(PipelineConfig& cfg, const json& overrides, const std::string& source)
{
    if (!overrides.is_object()) throw Error(ErrorKind::Parse, source + ": expected a JSON object");
    for (const auto& [key, v] : overrides.items()) {
        if (key == "reference") {
            if (!v.is_string()) bad_type(source, key, "a channel name");
            try {
                cfg.reference = parse_channel(v.get<std::string>());
            } catch (const Error& e) {
                throw Error(ErrorKind::Parse, source + ": field 'reference': " + e.detail());
            }
        } else if (key == "window_radius") {
            cfg.window_radius = as_int(v, source, key);
        } else if (key == "search_radius") {
            cfg.search_radius = as_int(v, source, key);
        } else if (key == "joint_search") {
            cfg.joint_search = as_bool(v, source, key);
        } else if (key == "keypoint_count") {
            cfg.keypoint_count = as_int(v, source, key);
        } else if (key == "cell_grid") {
            cfg.cell_grid = as_int(v, source, key);
        } else if (key == "grad_percentile") {
            cfg.grad_percentile = as_double(v, source, key);
        } else if (key == "sat_threshold") {
            cfg.sat_threshold = as_double(v, source, key);
        } else if (key == "sat_dilation") {
            cfg.sat_dilation = v.is_null() ? std::nullopt : std::optional<int>(as_int(v, source, key));
        } else if (key == "l_max") {
            cfg.l_max = as_double(v, source, key);
        } else if (key == "use_l_weighting") {
            cfg.use_l_weighting = as_bool(v, source, key);
        } else if (key == "seed") {
            if (!v.is_number_unsigned()) bad_type(source, key, "a non-negative integer");
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "border_crop") {
            cfg.border_crop = as_int(v, source, key);
        } else {
            throw Error(ErrorKind::Parse, source + ": unknown field '" + key + "'");
        }
    }
}

namespace {

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const json& flag_overrides)
{
    PipelineConfig cfg;
    if (file) {
        std::ifstream in(*file, std::ios::binary);
        if (!in) throw Error(ErrorKind::Io, "cannot open config " + file->string());
        const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        json parsed;
        try {
            parsed = json::parse(text);
        } catch (const json::parse_error& e) {
            // Byte offsets point one past the offending character.
            const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
            throw Error(ErrorKind::Parse, file->string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                              ": malformed JSON");
        }
        apply_overrides(cfg, parsed, file->string());
    }
    apply_overrides(cfg, flag_overrides, "command line");
    validate(cfg);
    return cfg;
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << config_to_json(cfg).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace chromafix
