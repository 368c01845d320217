#include "chromafix/report.hpp"

#include "chromafix/error.hpp"

#include <cmath>

namespace chromafix {

using nlohmann::json;

namespace {

json lvalue_json(const LValue& l)
{
    return l.defined() ? json(l.value()) : json(nullptr);
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json transform_json(const SimilarityTransform& t)
{
    return json{{"sigma", t.sigma}, {"tx", t.tx}, {"ty", t.ty}};
}

}  // namespace

json to_json(const Keypoint& kp)
{
    return json{{"x", kp.x}, {"y", kp.y}, {"grad", kp.grad}, {"pre_l", lvalue_json(kp.pre_l)}};
}

json to_json(const DisparityMatch& m)
{
    return json{{"x", m.keypoint.x},
                {"y", m.keypoint.y},
                {"dgx", m.first.dx},
                {"dgy", m.first.dy},
                {"dbx", m.second.dx},
                {"dby", m.second.dy},
                {"pre_l", lvalue_json(m.keypoint.pre_l)},
                {"post_l", m.post_l}};
}

json to_json(const ChannelFit& fit)
{
    const FitReport& r = fit.report;
    return json{{"channel", std::string(to_string(fit.channel))},
                {"sigma", r.transform.sigma},
                {"tx", r.transform.tx},
                {"ty", r.transform.ty},
                {"rms_residual", r.rms_residual},
                {"n_points", r.n_points},
                {"condition_flag", r.condition_flag}};
}

json to_json(const AberrationSpec& spec)
{
    const auto [first, second] = moving_channels(spec.reference);
    json a = transform_json(spec.moving[0]);
    a["channel"] = std::string(to_string(first));
    json b = transform_json(spec.moving[1]);
    b["channel"] = std::string(to_string(second));
    return json{{"reference", std::string(to_string(spec.reference))}, {"moving", json::array({a, b})}};
}

json keypoints_to_json(const std::vector<Keypoint>& kps)
{
    json arr = json::array();
    for (const auto& kp : kps) arr.push_back(to_json(kp));
    return arr;
}

json to_json(const CorrectionResult& result, const PipelineConfig& cfg)
{
    const auto [first, second] = moving_channels(result.reference);
    const CorrectionDiagnostics& d = result.diagnostics;
    json matches = json::array();
    for (const auto& m : result.matches) matches.push_back(to_json(m));
    json transforms = json::array();
    for (const auto& f : result.transforms) transforms.push_back(to_json(f));
    return json{
        {"reference", std::string(to_string(result.reference))},
        {"moving_channels", json::array({std::string(to_string(first)), std::string(to_string(second))})},
        {"width", result.corrected.width()},
        {"height", result.corrected.height()},
        {"config", config_to_json(cfg)},
        {"transforms", transforms},
        {"diagnostics",
         json{{"grad_threshold", d.grad_threshold},
              {"candidates", d.candidates},
              {"keypoints", d.keypoints},
              {"matches", d.matches},
              {"dropped", d.dropped},
              {"survivors", d.survivors},
              {"mean_l_before", d.mean_l_before},
              {"mean_l_after", d.mean_l_after}}},
        {"keypoints", keypoints_to_json(result.keypoints)},
        {"matches", matches},
    };
}

json to_json(const EvalReport& report)
{
    json recovered = json::array();
    for (const auto& f : report.recovered) recovered.push_back(to_json(f));
    json errors = json::array();
    for (const auto& e : report.errors) errors.push_back(json{{"sigma", e.sigma}, {"translation", e.translation}});
    return json{{"spec", to_json(report.spec)},
                {"recovered", recovered},
                {"transform_errors", errors},
                {"psnr_before", finite_or_null(report.psnr_before)},
                {"psnr_db", finite_or_null(report.psnr_db)},
                {"mean_l_original", report.mean_l_original},
                {"mean_l_before", report.mean_l_before},
                {"mean_l_after", report.mean_l_after},
                {"survivors", report.diagnostics.survivors}};
}

AberrationSpec aberration_spec_from_json(const json& j)
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Parse, "aberration spec: " + what); };
    if (!j.is_object()) fail("expected an object");
    AberrationSpec spec;
    for (const auto& [key, v] : j.items()) {
        if (key == "reference") {
            if (!v.is_string()) fail("'reference' must be a channel name");
            spec.reference = parse_channel(v.get<std::string>());
        } else if (key != "moving") {
            fail("unknown field '" + key + "'");
        }
    }
    if (!j.contains("moving") || !j["moving"].is_array() || j["moving"].size() != 2) {
        fail("'moving' must be an array of two transforms");
    }
    const auto [first, second] = moving_channels(spec.reference);
    const ChannelId expected[2] = {first, second};
    for (int i = 0; i < 2; ++i) {
        const json& t = j["moving"][i];
        if (!t.is_object()) fail("transform entries must be objects");
        SimilarityTransform st;
        for (const auto& [key, v] : t.items()) {
            if (key == "channel") {
                if (!v.is_string() || parse_channel(v.get<std::string>()) != expected[i]) {
                    fail("moving entry " + std::to_string(i) + " must describe the " +
                         std::string(to_string(expected[i])) + " channel");
                }
                continue;
            }
            if (!v.is_number()) fail("'" + key + "' must be a number");
            if (key == "sigma") {
                st.sigma = v.get<double>();
            } else if (key == "tx") {
                st.tx = v.get<double>();
            } else if (key == "ty") {
                st.ty = v.get<double>();
            } else {
                fail("unknown field '" + key + "'");
            }
        }
        spec.moving[i] = st;
    }
    validate(spec);
    return spec;
}

}  // namespace chromafix
