#pragma once

#include "chromafix/config.hpp"
#include "chromafix/disparity.hpp"
#include "chromafix/image.hpp"
#include "chromafix/keypoints.hpp"
#include "chromafix/transform.hpp"

#include <array>
#include <vector>

namespace chromafix {

// output(p) = sample_bilinear(channel, transform(p)). The transform maps
// reference coordinates into the moving channel, so values are pulled back
// without inverting it.
ScalarField warp_channel(const ScalarField& channel, const SimilarityTransform& transform);

struct CorrectionDiagnostics {
    double grad_threshold = 0;
    int candidates = 0;
    int keypoints = 0;
    int matches = 0;
    int dropped = 0;       // degenerate neighbourhoods
    int survivors = 0;     // after pruning
    double mean_l_before = 0;  // mean pre_l over matched keypoints with defined pre_l
    double mean_l_after = 0;   // mean post_l over all matches
};

struct CorrectionResult {
    RgbImage corrected;
    ChannelId reference = ChannelId::Green;
    std::array<ChannelFit, 2> transforms;
    CorrectionDiagnostics diagnostics;
    std::vector<Keypoint> keypoints;
    std::vector<DisparityMatch> matches;    // before pruning
    std::vector<DisparityMatch> survivors;  // used by the fit
};

// gradient -> saturation mask -> keypoints -> disparity search -> prune -> fit
// -> warp. Errors carry the failing stage name.
CorrectionResult correct_image(const RgbImage& image, const PipelineConfig& cfg);

// Keypoint selection exactly as correct_image performs it.
struct KeypointStage {
    ScalarField grad;
    double grad_threshold = 0;
    int candidates = 0;
    std::vector<Keypoint> keypoints;
};
KeypointStage find_keypoints(const RgbImage& image, const PipelineConfig& cfg);

}  // namespace chromafix
