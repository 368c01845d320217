#include "chromafix/warp.hpp"

#include "chromafix/error.hpp"
#include "chromafix/parallel.hpp"

#include <limits>
#include <string>

namespace chromafix {

//   reference grid            moving channel
//   p = (x, y)   --transform-->  (sigma x + t_x, sigma y + t_y)
//   out(p)      <---- sample ----
ScalarField warp_channel(const ScalarField& channel, const SimilarityTransform& transform)
{
    if (!(transform.sigma > 0.0)) throw Error(ErrorKind::DegenerateFit, "warp needs a positive scale");
    const int w = channel.width();
    const int h = channel.height();
    ScalarField out(w, h);
    parallel_for(0, h, [&](int y) {
        double* row = out.row(y);
        for (int x = 0; x < w; ++x) {
            const auto [sx, sy] = transform.apply(x, y);
            row[x] = sample_bilinear(channel, sx, sy);
        }
    });
    return out;
}

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(stage);
    }
}

}  // namespace

KeypointStage find_keypoints(const RgbImage& image, const PipelineConfig& cfg)
{
    validate(cfg);
    const int margin = cfg.window_radius + cfg.search_radius;
    if (image.width() <= 2 * margin || image.height() <= 2 * margin) {
        throw Error(ErrorKind::Size,
                    "image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                        " is too small for a window radius of " + std::to_string(cfg.window_radius) +
                        " plus a search radius of " + std::to_string(cfg.search_radius),
                    "keypoints");
    }

    KeypointStage stage;
    stage.grad = in_stage("gradient", [&] { return gradient_magnitude(image); });
    const Mask sat = in_stage("saturation", [&] {
        return saturation_mask(image, cfg.sat_threshold, cfg.effective_sat_dilation());
    });

    return in_stage("keypoints", [&] {
        // A flat image has no nonzero gradients; the threshold must still
        // reject its zero-gradient pixels.
        const double pct = nonzero_percentile(stage.grad, cfg.grad_percentile);
        stage.grad_threshold = pct > 0.0 ? pct : std::numeric_limits<double>::min();
        const Mask candidates = candidate_mask(stage.grad, sat, stage.grad_threshold, margin);
        for (auto v : candidates.values()) stage.candidates += v ? 1 : 0;

        KeypointConfig kc;
        kc.count = cfg.keypoint_count;
        kc.grad_threshold = stage.grad_threshold;
        kc.use_l_weighting = cfg.use_l_weighting;
        kc.cell_grid = cfg.cell_grid;
        kc.seed = cfg.seed;
        kc.window_radius = cfg.window_radius;
        stage.keypoints = select_keypoints(image, stage.grad, candidates, kc);
        return std::move(stage);
    });
}

CorrectionResult correct_image(const RgbImage& image, const PipelineConfig& cfg)
{
    KeypointStage kps = find_keypoints(image, cfg);

    const SearchConfig search{cfg.search_radius, cfg.window_radius, cfg.joint_search};
    MatchSet matched = in_stage("disparity", [&] { return match_all(image, kps.keypoints, search, cfg.reference); });
    std::vector<DisparityMatch> survivors = in_stage("prune", [&] { return prune_matches(matched.matches, cfg.l_max); });
    const std::array<ChannelFit, 2> fits = in_stage("fit", [&] { return fit_channels(survivors, cfg.reference); });

    RgbImage corrected = in_stage("warp", [&] {
        RgbImage out = image;
        for (const auto& fit : fits) {
            out = out.with_channel(fit.channel, warp_channel(image.channel(fit.channel), fit.report.transform));
        }
        return out;
    });

    CorrectionDiagnostics diag;
    diag.grad_threshold = kps.grad_threshold;
    diag.candidates = kps.candidates;
    diag.keypoints = static_cast<int>(kps.keypoints.size());
    diag.matches = static_cast<int>(matched.matches.size());
    diag.dropped = static_cast<int>(matched.dropped.size());
    diag.survivors = static_cast<int>(survivors.size());
    double pre_sum = 0;
    int pre_n = 0;
    double post_sum = 0;
    for (const auto& m : matched.matches) {
        if (m.keypoint.pre_l.defined()) {
            pre_sum += m.keypoint.pre_l.value();
            ++pre_n;
        }
        post_sum += m.post_l;
    }
    diag.mean_l_before = pre_n > 0 ? pre_sum / pre_n : 0.0;
    diag.mean_l_after = matched.matches.empty() ? 0.0 : post_sum / static_cast<double>(matched.matches.size());

    return CorrectionResult{std::move(corrected), cfg.reference, fits, diag,
                            std::move(kps.keypoints), std::move(matched.matches), std::move(survivors)};
}

}  // namespace chromafix
