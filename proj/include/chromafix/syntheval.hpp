#pragma once

#include "chromafix/config.hpp"
#include "chromafix/image.hpp"
#include "chromafix/transform.hpp"
#include "chromafix/warp.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace chromafix {

// Ground-truth displacement of the two moving channels (moving_channels(reference) order).
struct AberrationSpec {
    ChannelId reference = ChannelId::Green;
    std::array<SimilarityTransform, 2> moving{};
};

inline constexpr double kMinSpecSigma = 0.9;
inline constexpr double kMaxSpecSigma = 1.1;
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

// Throws Validation when a scale falls outside [0.9, 1.1] or a value is not finite.
void validate(const AberrationSpec& spec);

// Resamples each moving channel through the inverse of its spec transform, so
// that correcting the result should fit the spec transform itself.
RgbImage synthesize_aberration(const RgbImage& image, const AberrationSpec& spec);

// 10 log10(1 / MSE) over all channels, excluding a `border_crop` frame.
// Returns kInfinitePsnr for identical inputs; throws Size on mismatched or
// fully-cropped inputs.
double psnr(const RgbImage& a, const RgbImage& b, int border_crop);

// Mean defined L (zero disparity, window `radius`) over pixels whose gradient
// magnitude is at or above the `grad_percentile` of nonzero gradients.
// Throws DegenerateNeighbourhood when no pixel has a defined L.
double mean_l(const RgbImage& image, int radius, double grad_percentile);

// Procedural test image: multi-octave value noise with overlaid discs and
// rectangles, coloured as a mix of two slowly drifting chromatic directions.
// Intensities stay within [0.04, 0.94] so nothing saturates.
RgbImage procedural_texture(int width, int height, std::uint64_t seed);

// Nine specs mixing scales {0.996, 1, 1.004} and translations {-2.5, 0, 2.5}
// such that every moving channel is displaced in every case.
std::vector<AberrationSpec> default_sweep(ChannelId reference = ChannelId::Green);

struct ChannelError {
    double sigma = 0;        // |sigma_est - sigma_true|
    double translation = 0;  // |t_est - t_true|, pixels
};

struct EvalReport {
    AberrationSpec spec;
    std::array<ChannelFit, 2> recovered{};
    std::array<ChannelError, 2> errors{};
    double psnr_before = 0;  // aberrated vs original
    double psnr_db = 0;      // corrected vs original
    double mean_l_original = 0;
    double mean_l_before = 0;  // aberrated
    double mean_l_after = 0;   // corrected
    CorrectionDiagnostics diagnostics;
};

// Aberrates `original` by `spec`, corrects it with `cfg` (reference taken from
// the spec) and scores the result.
EvalReport evaluate_case(const RgbImage& original, const AberrationSpec& spec, const PipelineConfig& cfg);

// One CSV header line plus one row per report.
void write_suite_csv(std::ostream& out, const std::vector<EvalReport>& reports);

}  // namespace chromafix
