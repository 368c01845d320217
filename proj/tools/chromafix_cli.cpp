// chromafix: lateral chromatic aberration correction from the command line.
//
// Exit codes: 0 success, 1 usage / I/O / configuration, 2 pipeline failure.

#include "chromafix/collinearity.hpp"
#include "chromafix/config.hpp"
#include "chromafix/error.hpp"
#include "chromafix/image.hpp"
#include "chromafix/overlay.hpp"
#include "chromafix/parallel.hpp"
#include "chromafix/report.hpp"
#include "chromafix/syntheval.hpp"
#include "chromafix/warp.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifndef CHROMAFIX_VERSION
#define CHROMAFIX_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chromafix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;

// One optional per PipelineConfig field; set ones become overrides.
struct ConfigFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> reference;
    std::optional<int> window_radius;
    std::optional<int> search_radius;
    std::optional<bool> joint_search;
    std::optional<int> keypoint_count;
    std::optional<int> cell_grid;
    std::optional<double> grad_percentile;
    std::optional<double> sat_threshold;
    std::optional<int> sat_dilation;
    std::optional<double> l_max;
    std::optional<bool> use_l_weighting;
    std::optional<std::uint64_t> seed;
    std::optional<int> border_crop;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--config", config_file, "JSON config file (flags override it)");
        cmd.add_option("--reference", reference, "Fixed channel: red, green or blue (default green)");
        cmd.add_option("--window_radius", window_radius, "Neighbourhood radius for L (default 7)");
        cmd.add_option("--search_radius", search_radius, "Maximum disparity per axis (default 8)");
        cmd.add_option("--joint_search", joint_search, "Joint 4D search (true) or sequential (false)");
        cmd.add_option("--keypoint_count", keypoint_count, "Number of keypoints (default 96)");
        cmd.add_option("--cell_grid", cell_grid, "Keypoint stratification grid size (default 4)");
        cmd.add_option("--grad_percentile", grad_percentile, "Gradient percentile threshold (default 60)");
        cmd.add_option("--sat_threshold", sat_threshold, "Saturation threshold (default 0.99)");
        cmd.add_option("--sat_dilation", sat_dilation, "Saturation dilation radius (default window_radius)");
        cmd.add_option("--l_max", l_max, "Pruning threshold on post-alignment L (default 0.01)");
        cmd.add_option("--use_l_weighting", use_l_weighting, "Weight keypoint sampling by L (default false)");
        cmd.add_option("--seed", seed, "Random seed (default 0)");
        cmd.add_option("--border_crop", border_crop, "PSNR border exclusion in pixels (default 16)");
    }

    PipelineConfig load() const
    {
        json o = json::object();
        if (reference) o["reference"] = *reference;
        if (window_radius) o["window_radius"] = *window_radius;
        if (search_radius) o["search_radius"] = *search_radius;
        if (joint_search) o["joint_search"] = *joint_search;
        if (keypoint_count) o["keypoint_count"] = *keypoint_count;
        if (cell_grid) o["cell_grid"] = *cell_grid;
        if (grad_percentile) o["grad_percentile"] = *grad_percentile;
        if (sat_threshold) o["sat_threshold"] = *sat_threshold;
        if (sat_dilation) o["sat_dilation"] = *sat_dilation;
        if (l_max) o["l_max"] = *l_max;
        if (use_l_weighting) o["use_l_weighting"] = *use_l_weighting;
        if (seed) o["seed"] = *seed;
        if (border_crop) o["border_crop"] = *border_crop;
        std::optional<fs::path> file;
        if (config_file) file = fs::path(*config_file);
        return load_config(file, o);
    }
};

void write_json(const json& j, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": malformed JSON at byte " + std::to_string(e.byte));
    }
}

std::string format_fit(const ChannelFit& fit, int survivors, int matches)
{
    const FitReport& r = fit.report;
    char line[256];
    std::snprintf(line, sizeof line, "%-5s sigma=%.6f tx=%+.3f ty=%+.3f rms=%.3f px points=%d/%d%s",
                  std::string(to_string(fit.channel)).c_str(), r.transform.sigma, r.transform.tx, r.transform.ty,
                  r.rms_residual, survivors, matches, r.condition_flag ? " (ill-conditioned)" : "");
    return line;
}

// ---- correct ------------------------------------------------------------------

struct CorrectArgs {
    std::string input, output;
    std::optional<std::string> report, overlay;
    ConfigFlags flags;
};

int run_correct(const CorrectArgs& args)
{
    const PipelineConfig cfg = args.flags.load();
    const RgbImage image = load_image(args.input);
    const CorrectionResult result = correct_image(image, cfg);
    save_image(result.corrected, args.output);
    if (args.report) write_json(to_json(result, cfg), *args.report);
    if (args.overlay) save_image(draw_matches(image, result.matches), *args.overlay);

    const auto& d = result.diagnostics;
    for (const auto& fit : result.transforms) std::cout << format_fit(fit, d.survivors, d.matches) << '\n';
    std::cout << "keypoints=" << d.keypoints << " matches=" << d.matches << " dropped=" << d.dropped
              << " kept=" << d.survivors << " mean_L " << d.mean_l_before << " -> " << d.mean_l_after << '\n';
    return kExitOk;
}

// ---- aberrate -----------------------------------------------------------------

struct AberrateArgs {
    std::string input, output;
    std::string reference = "green";
    // Slot 0/1 = first/second moving channel ("g"/"b" flags, as in the report's dg/db fields).
    double sigma[2] = {1.0, 1.0}, tx[2] = {0.0, 0.0}, ty[2] = {0.0, 0.0};
    std::optional<std::string> spec_out;
};

AberrationSpec spec_from_args(const AberrateArgs& args)
{
    AberrationSpec spec;
    spec.reference = parse_channel(args.reference);
    for (int i = 0; i < 2; ++i) spec.moving[i] = {args.sigma[i], args.tx[i], args.ty[i]};
    validate(spec);
    return spec;
}

int run_aberrate(const AberrateArgs& args)
{
    const AberrationSpec spec = spec_from_args(args);
    const RgbImage image = load_image(args.input);
    save_image(synthesize_aberration(image, spec), args.output);
    const json j = to_json(spec);
    if (args.spec_out) write_json(j, *args.spec_out);
    std::cout << j.dump() << '\n';
    return kExitOk;
}

// ---- lmap ---------------------------------------------------------------------

struct LmapArgs {
    std::string input, output;
    int radius = 7;
    bool colour = false;
    double gain = 1.0;
};

int run_lmap(const LmapArgs& args)
{
    const RgbImage image = load_image(args.input);
    const LMap map = l_map(image, args.radius);
    save_image(render_lmap(map, args.colour, args.gain), args.output);

    double sum = 0;
    long long n = 0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        if (map.defined.values()[i]) {
            sum += map.values.values()[i];
            ++n;
        }
    }
    std::cout << "defined=" << n << " mean_L=" << (n ? sum / static_cast<double>(n) : 0.0) << '\n';
    return kExitOk;
}

// ---- keypoints ----------------------------------------------------------------

struct KeypointArgs {
    std::string input, overlay;
    std::optional<std::string> json_out;
    ConfigFlags flags;
};

int run_keypoints(const KeypointArgs& args)
{
    const PipelineConfig cfg = args.flags.load();
    const RgbImage image = load_image(args.input);
    const KeypointStage stage = find_keypoints(image, cfg);
    save_image(draw_keypoints(image, stage.keypoints), args.overlay);
    const fs::path json_path = args.json_out ? fs::path(*args.json_out) : fs::path(args.overlay).replace_extension(".json");
    write_json(keypoints_to_json(stage.keypoints), json_path);
    std::cout << "keypoints=" << stage.keypoints.size() << " candidates=" << stage.candidates
              << " grad_threshold=" << stage.grad_threshold << " json=" << json_path.string() << '\n';
    return kExitOk;
}

// ---- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
    std::string input, csv;
    std::optional<std::string> sweep, reports;
    ConfigFlags flags;
};

int run_evaluate(const EvaluateArgs& args)
{
    const PipelineConfig cfg = args.flags.load();
    const RgbImage original = load_image(args.input);

    std::vector<AberrationSpec> specs;
    if (args.sweep) {
        const json j = read_json(*args.sweep);
        if (!j.is_array()) throw Error(ErrorKind::Parse, *args.sweep + ": expected an array of aberration specs");
        for (const auto& s : j) specs.push_back(aberration_spec_from_json(s));
    } else {
        specs = default_sweep(cfg.reference);
    }

    std::vector<EvalReport> reports;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        try {
            reports.push_back(evaluate_case(original, specs[i], cfg));
        } catch (const Error& e) {
            throw Error(e.kind(), "case " + std::to_string(i) + ": " + e.detail(), e.stage());
        }
        const EvalReport& r = reports.back();
        std::printf("case %zu: psnr %.2f -> %.2f dB, mean_L %.4f -> %.4f, |dsigma| %.5f/%.5f, |dt| %.3f/%.3f px\n", i,
                    r.psnr_before, r.psnr_db, r.mean_l_before, r.mean_l_after, r.errors[0].sigma, r.errors[1].sigma,
                    r.errors[0].translation, r.errors[1].translation);
    }

    std::ofstream out(args.csv, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + args.csv + " for writing");
    write_suite_csv(out, reports);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + args.csv);
    if (args.reports) {
        json all = json::array();
        for (const auto& r : reports) all.push_back(to_json(r));
        write_json(all, *args.reports);
    }
    return kExitOk;
}

// ---- texture ------------------------------------------------------------------

struct TextureArgs {
    std::string output;
    int width = 512, height = 512;
    std::uint64_t seed = 1;
};

int run_texture(const TextureArgs& args)
{
    save_image(procedural_texture(args.width, args.height, args.seed), args.output);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"chromafix - single-image lateral chromatic aberration correction"};
    app.set_version_flag("--version", std::string("chromafix ") + CHROMAFIX_VERSION);
    app.require_subcommand(1, 1);
    app.fallthrough();
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    CorrectArgs correct;
    auto* c = app.add_subcommand("correct", "Correct an image; optionally write a JSON report and a match overlay");
    c->add_option("input", correct.input, "Input PNG/PPM")->required();
    c->add_option("output", correct.output, "Corrected image (.png or .ppm)")->required();
    c->add_option("--report", correct.report, "JSON report path");
    c->add_option("--overlay", correct.overlay, "Debug overlay with keypoints and disparities");
    correct.flags.attach(*c);

    AberrateArgs aberrate;
    auto* a = app.add_subcommand("aberrate", "Displace the non-reference channels by a known scale + translation");
    a->add_option("input", aberrate.input, "Input PNG/PPM")->required();
    a->add_option("output", aberrate.output, "Aberrated image")->required();
    a->add_option("--reference", aberrate.reference, "Channel left untouched")->capture_default_str();
    a->footer("The moving channels are the two non-reference channels in r, g, b order:\n"
              "  reference green -> first = red,   second = blue\n"
              "  reference red   -> first = green, second = blue\n"
              "  reference blue  -> first = red,   second = green");
    const char* slots[2] = {"g", "b"};
    const char* roles[2] = {"first", "second"};
    for (int i = 0; i < 2; ++i) {
        const std::string sl = slots[i];
        const std::string role = std::string(roles[i]) + " moving channel";
        a->add_option("--sigma-" + sl, aberrate.sigma[i], "Scale of the " + role + " (0.9..1.1)")->capture_default_str();
        a->add_option("--tx-" + sl, aberrate.tx[i], "x translation of the " + role + " (px)")->capture_default_str();
        a->add_option("--ty-" + sl, aberrate.ty[i], "y translation of the " + role + " (px)")->capture_default_str();
    }
    a->add_option("--spec-out", aberrate.spec_out, "Also write the spec JSON to this file");

    LmapArgs lmap;
    auto* l = app.add_subcommand("lmap", "Render the per-pixel L map");
    l->add_option("input", lmap.input, "Input PNG/PPM")->required();
    l->add_option("output", lmap.output, "L map image")->required();
    l->add_option("--radius", lmap.radius, "Neighbourhood radius")->capture_default_str();
    l->add_flag("--colour", lmap.colour, "Mark undefined pixels magenta");
    l->add_option("--gain", lmap.gain, "Multiply L before clamping to [0,1]")->capture_default_str();

    KeypointArgs keypoints;
    auto* k = app.add_subcommand("keypoints", "Select keypoints; write an overlay PNG and a JSON list");
    k->add_option("input", keypoints.input, "Input PNG/PPM")->required();
    k->add_option("overlay", keypoints.overlay, "Overlay image")->required();
    k->add_option("--json", keypoints.json_out, "Keypoint JSON (default: overlay path with .json)");
    keypoints.flags.attach(*k);

    EvaluateArgs evaluate;
    auto* e = app.add_subcommand("evaluate", "Aberrate, correct and score a sweep of synthetic specs");
    e->add_option("input", evaluate.input, "Aberration-free original")->required();
    e->add_option("csv", evaluate.csv, "Summary CSV output")->required();
    e->add_option("--sweep", evaluate.sweep, "JSON array of specs (default: built-in 9-case sweep)");
    e->add_option("--reports", evaluate.reports, "Per-case JSON reports");
    evaluate.flags.attach(*e);

    TextureArgs texture;
    auto* t = app.add_subcommand("texture", "Write a procedural test image");
    t->add_option("output", texture.output, "Output image")->required();
    t->add_option("--width", texture.width, "Image width")->capture_default_str();
    t->add_option("--height", texture.height, "Image height")->capture_default_str();
    t->add_option("--seed", texture.seed, "Texture seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& s) {
        return app.exit(s);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitUsage;
    }

    set_thread_count(threads);
    try {
        if (c->parsed()) return run_correct(correct);
        if (a->parsed()) return run_aberrate(aberrate);
        if (l->parsed()) return run_lmap(lmap);
        if (k->parsed()) return run_keypoints(keypoints);
        if (e->parsed()) return run_evaluate(evaluate);
        if (t->parsed()) return run_texture(texture);
    } catch (const Error& err) {
        std::cerr << "chromafix: " << err.what() << '\n';
        return err.is_pipeline_failure() ? kExitPipeline : kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "chromafix: " << err.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
