#pragma once

#include "chromafix/collinearity.hpp"
#include "chromafix/image.hpp"
#include "chromafix/keypoints.hpp"

#include <string>
#include <vector>

namespace chromafix {

struct SearchConfig {
    int radius_px = 8;      // max |disparity| per axis
    int window_radius = 7;  // neighbourhood radius for L
    bool joint = true;      // joint 4D search, else sequential per channel
};

// Best integer disparities of the two moving channels at one keypoint.
// `first` / `second` belong to moving_channels(reference).first / .second;
// with a red reference these are the green and blue disparities.
struct DisparityMatch {
    Keypoint keypoint;
    Offset first;
    Offset second;
    double post_l = 0;

    friend bool operator==(const DisparityMatch&, const DisparityMatch&) = default;
};

struct DroppedKeypoint {
    std::size_t index = 0;  // position in the input keypoint list
    std::string reason;
};

struct MatchSet {
    std::vector<DisparityMatch> matches;  // input order
    std::vector<DroppedKeypoint> dropped;
};

// Strict ordering used to pick the minimiser: smaller L, then smaller
// |first|^2 + |second|^2, then lexicographic (first.dx, first.dy, second.dx, second.dy).
bool better_candidate(double l_a, Offset first_a, Offset second_a, double l_b, Offset first_b, Offset second_b) noexcept;

// Minimises L over integer disparities in [-radius_px, radius_px]^2 per moving
// channel. Throws Bounds when the keypoint lacks the window + search margin and
// DegenerateNeighbourhood when every candidate is Undefined.
DisparityMatch search_match(const RgbImage& image, const Keypoint& kp, const SearchConfig& cfg, ChannelId reference);

// search_match for each keypoint (concurrently), preserving input order.
// Degenerate keypoints are dropped and listed; throws InsufficientMatches if
// a non-empty input loses every keypoint.
MatchSet match_all(const RgbImage& image, const std::vector<Keypoint>& kps, const SearchConfig& cfg,
                   ChannelId reference);

}  // namespace chromafix
