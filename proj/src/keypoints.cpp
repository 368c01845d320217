#include "chromafix/keypoints.hpp"

#include "chromafix/error.hpp"
#include "chromafix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chromafix {

double nonzero_percentile(const ScalarField& field, double percent)
{
    std::vector<double> values;
    values.reserve(field.size());
    for (double v : field.values()) {
        if (v > 0.0) values.push_back(v);
    }
    if (values.empty()) return 0.0;
    const double p = std::clamp(percent, 0.0, 100.0) / 100.0;
    const auto rank = static_cast<std::size_t>(std::floor(p * static_cast<double>(values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
    return values[rank];
}

Mask candidate_mask(const ScalarField& grad, const Mask& sat, double grad_threshold, int margin)
{
    if (!grad.same_shape(sat)) throw Error(ErrorKind::Size, "gradient and saturation mask differ in size");
    const int w = grad.width();
    const int h = grad.height();
    Mask out(w, h, 0);
    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            if (grad.at(x, y) >= grad_threshold && sat.at(x, y)) out.at(x, y) = 1;
        }
    }
    return out;
}

std::size_t draw_weighted_index(std::span<const double> weights, std::mt19937_64& rng)
{
    // 53 random bits -> [0, 1); std::uniform_real_distribution is not
    // reproducible across standard libraries.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) {
        return std::min(weights.size() - 1, static_cast<std::size_t>(u * static_cast<double>(weights.size())));
    }
    const double target = u * total;
    double running = 0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        running += weights[i];
        last_positive = i;
        if (target < running) return i;
    }
    return last_positive;
}

std::vector<Keypoint> select_keypoints(const RgbImage& image, const ScalarField& grad, const Mask& candidates,
                                       const KeypointConfig& cfg)
{
    const int w = image.width();
    const int h = image.height();
    if (!grad.same_shape(w, h) || !candidates.same_shape(w, h)) {
        throw Error(ErrorKind::Size, "gradient/candidate fields do not match the image");
    }
    if (cfg.count < 2) throw Error(ErrorKind::Validation, "keypoint count must be at least 2");
    const int grid = std::max(cfg.cell_grid, 1);

    struct Candidate {
        int x, y;
    };
    std::vector<Candidate> all;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (candidates.at(x, y)) all.push_back({x, y});
        }
    }
    if (all.size() < 2) {
        throw Error(ErrorKind::InsufficientKeypoints,
                    "only " + std::to_string(all.size()) + " candidate pixel(s) passed the gradient/saturation filter");
    }

    std::vector<double> weight(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) weight[i] = grad.at(all[i].x, all[i].y);
    if (cfg.use_l_weighting) {
        parallel_for(0, static_cast<int>(all.size()), [&](int i) {
            const LValue l = l_at(image, all[i].x, all[i].y, cfg.window_radius, ChannelShifts{});
            weight[i] *= l.value_or(0.0);
        });
    }

    struct Cell {
        std::vector<std::size_t> members;  // indices into `all`
        std::vector<double> weights;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(grid) * grid);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const int cx = static_cast<int>(static_cast<long long>(all[i].x) * grid / w);
        const int cy = static_cast<int>(static_cast<long long>(all[i].y) * grid / h);
        Cell& cell = cells[static_cast<std::size_t>(cy) * grid + cx];
        cell.members.push_back(i);
        cell.weights.push_back(weight[i]);
    }

    std::mt19937_64 rng(cfg.seed);
    std::vector<Candidate> picked;
    const auto target = static_cast<std::size_t>(cfg.count);
    bool any_left = true;
    while (picked.size() < target && any_left) {
        any_left = false;
        for (Cell& cell : cells) {
            if (picked.size() >= target) break;
            if (cell.members.empty()) continue;
            const std::size_t k = draw_weighted_index(cell.weights, rng);
            picked.push_back(all[cell.members[k]]);
            cell.members[k] = cell.members.back();
            cell.weights[k] = cell.weights.back();
            cell.members.pop_back();
            cell.weights.pop_back();
            any_left = any_left || !cell.members.empty();
        }
    }

    std::vector<Keypoint> out(picked.size());
    parallel_for(0, static_cast<int>(picked.size()), [&](int i) {
        const auto [x, y] = picked[i];
        out[i] = Keypoint{x, y, grad.at(x, y), l_at(image, x, y, cfg.window_radius, ChannelShifts{})};
    });
    return out;
}

}  // namespace chromafix
