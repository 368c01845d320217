#pragma once

#include "chromafix/disparity.hpp"
#include "chromafix/image.hpp"

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace chromafix {

// Uniform scale plus translation mapping reference-channel coordinates p to
// moving-channel coordinates (sigma p_x + t_x, sigma p_y + t_y), origin at
// pixel (0,0). As a homogeneous matrix: [[sigma,0,t_x],[0,sigma,t_y],[0,0,1]].
struct SimilarityTransform {
    double sigma = 1.0;
    double tx = 0.0;
    double ty = 0.0;

    static SimilarityTransform identity() noexcept { return {}; }

    std::array<double, 2> apply(double x, double y) const noexcept { return {sigma * x + tx, sigma * y + ty}; }
    // sigma' = 1/sigma, t' = -t/sigma.
    SimilarityTransform inverse() const noexcept { return {1.0 / sigma, -tx / sigma, -ty / sigma}; }
    // (this o other)(p) = this(other(p)).
    SimilarityTransform compose(const SimilarityTransform& other) const noexcept
    {
        return {sigma * other.sigma, sigma * other.tx + tx, sigma * other.ty + ty};
    }
    std::array<std::array<double, 3>, 3> matrix() const noexcept
    {
        return {{{sigma, 0.0, tx}, {0.0, sigma, ty}, {0.0, 0.0, 1.0}}};
    }

    friend bool operator==(const SimilarityTransform&, const SimilarityTransform&) = default;
};

struct PointPair {
    double ref_x = 0, ref_y = 0;  // reference-channel position
    double mov_x = 0, mov_y = 0;  // where the same content sits in the moving channel
};

struct FitReport {
    SimilarityTransform transform;
    double rms_residual = 0;  // over the 2n coordinate residuals, pixels
    int n_points = 0;
    bool condition_flag = false;  // near-degenerate point geometry
};

struct ChannelFit {
    ChannelId channel = ChannelId::Red;
    FitReport report;
};

// Default pruning threshold on post-alignment L.
inline constexpr double kDefaultLMax = 0.01;
inline constexpr double kConditionLimit = 1e8;

// Keeps matches with post_l <= l_max, in order. Throws InsufficientMatches when
// fewer than 2 survive (3 unknowns, 2 equations per point).
std::vector<DisparityMatch> prune_matches(const std::vector<DisparityMatch>& matches, double l_max);

// Least squares for (sigma, t_x, t_y) over the stacked rows
//   [ref_x, 1, 0] . (sigma, t_x, t_y) = mov_x
//   [ref_y, 0, 1] . (sigma, t_x, t_y) = mov_y
// via the 3x3 normal equations. Throws InsufficientData for < 2 pairs and
// DegenerateFit when the system is singular or sigma <= 0.
FitReport fit_similarity(std::span<const PointPair> pairs);

// Reference -> moving point pairs for one moving channel (`second` selects the
// second moving channel's disparities).
std::vector<PointPair> point_pairs(const std::vector<DisparityMatch>& matches, bool second);

// One fit per moving channel, in moving_channels(reference) order.
std::array<ChannelFit, 2> fit_channels(const std::vector<DisparityMatch>& matches, ChannelId reference);

}  // namespace chromafix
