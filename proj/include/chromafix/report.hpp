#pragma once

#include "chromafix/disparity.hpp"
#include "chromafix/keypoints.hpp"
#include "chromafix/syntheval.hpp"
#include "chromafix/transform.hpp"
#include "chromafix/warp.hpp"

#include "json.hpp"

#include <vector>

namespace chromafix {

// JSON records. Undefined L and infinite PSNR serialize as null.
//   keypoint: {x, y, grad, pre_l}
//   match:    {x, y, dgx, dgy, dbx, dby, pre_l, post_l}  (dg*/db* = first/second moving channel)
//   fit:      {channel, sigma, tx, ty, rms_residual, n_points, condition_flag}
nlohmann::json to_json(const Keypoint& kp);
nlohmann::json to_json(const DisparityMatch& m);
nlohmann::json to_json(const ChannelFit& fit);
nlohmann::json to_json(const AberrationSpec& spec);
nlohmann::json to_json(const CorrectionResult& result, const PipelineConfig& cfg);
nlohmann::json to_json(const EvalReport& report);

nlohmann::json keypoints_to_json(const std::vector<Keypoint>& kps);

// Parses {reference, moving: [{sigma, tx, ty}, {sigma, tx, ty}]} strictly.
AberrationSpec aberration_spec_from_json(const nlohmann::json& j);

}  // namespace chromafix
