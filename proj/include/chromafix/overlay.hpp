#pragma once

#include "chromafix/disparity.hpp"
#include "chromafix/image.hpp"
#include "chromafix/keypoints.hpp"

#include <array>
#include <vector>

namespace chromafix {

// Debug renderings on top of a copy of `image`.
RgbImage draw_keypoints(const RgbImage& image, const std::vector<Keypoint>& kps, int arm = 4);

// A cross at each keypoint plus one line per moving channel from the keypoint
// towards keypoint + disparity, lengthened by `exaggeration` so one-pixel
// disparities stay visible. First channel in cyan, second in yellow.
RgbImage draw_matches(const RgbImage& image, const std::vector<DisparityMatch>& matches, double exaggeration = 4.0);

}  // namespace chromafix
