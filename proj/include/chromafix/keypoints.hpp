#pragma once

#include "chromafix/collinearity.hpp"
#include "chromafix/image.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace chromafix {

struct Keypoint {
    int x = 0;
    int y = 0;
    double grad = 0;
    LValue pre_l;  // L at zero disparity

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct KeypointConfig {
    int count = 96;
    double grad_threshold = 0;
    bool use_l_weighting = false;
    int cell_grid = 4;
    std::uint64_t seed = 0;
    // Neighbourhood radius used for pre_l (and for the weights when use_l_weighting).
    int window_radius = 7;
};

// Value at `percent` (0..100) of the nonzero entries of `field`, taking the
// lower neighbour rank floor(percent/100 * (n-1)). Returns 0 when no entry is nonzero.
double nonzero_percentile(const ScalarField& field, double percent);

// usable = grad >= grad_threshold, sat usable, and at least `margin` pixels
// from every border.
Mask candidate_mask(const ScalarField& grad, const Mask& sat, double grad_threshold, int margin);

// Index drawn with probability proportional to weights[i]; uniform when all
// weights are zero. Consumes exactly one value from `rng`.
std::size_t draw_weighted_index(std::span<const double> weights, std::mt19937_64& rng);

// Stratified, gradient-weighted sampling without replacement. The image is
// split into cell_grid x cell_grid cells which are visited round robin (row
// major), one draw per non-exhausted cell per round, until cfg.count points
// are taken or candidates run out. Throws InsufficientKeypoints when fewer
// than 2 candidates exist.
std::vector<Keypoint> select_keypoints(const RgbImage& image, const ScalarField& grad, const Mask& candidates,
                                       const KeypointConfig& cfg);

}  // namespace chromafix
