#include "chromafix/transform.hpp"

#include "chromafix/collinearity.hpp"
#include "chromafix/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chromafix {

std::vector<DisparityMatch> prune_matches(const std::vector<DisparityMatch>& matches, double l_max)
{
    std::vector<DisparityMatch> kept;
    std::copy_if(matches.begin(), matches.end(), std::back_inserter(kept),
                 [l_max](const DisparityMatch& m) { return m.post_l <= l_max; });
    if (kept.size() < 2) {
        throw Error(ErrorKind::InsufficientMatches, std::to_string(kept.size()) + " of " +
                                                        std::to_string(matches.size()) +
                                                        " matches have post-alignment L <= " + std::to_string(l_max) +
                                                        "; at least 2 are needed");
    }
    return kept;
}

FitReport fit_similarity(std::span<const PointPair> pairs)
{
    const std::size_t n = pairs.size();
    if (n < 2) throw Error(ErrorKind::InsufficientData, "similarity fit needs at least 2 point pairs");

    // Normal matrix N = A^T A and right-hand side A^T b for unknowns (sigma, tx, ty).
    double spp = 0, sx = 0, sy = 0, sxu = 0, su = 0, sv = 0;
    double min_x = pairs[0].ref_x, max_x = min_x, min_y = pairs[0].ref_y, max_y = min_y;
    for (const auto& p : pairs) {
        spp += p.ref_x * p.ref_x + p.ref_y * p.ref_y;
        sx += p.ref_x;
        sy += p.ref_y;
        sxu += p.ref_x * p.mov_x + p.ref_y * p.mov_y;
        su += p.mov_x;
        sv += p.mov_y;
        min_x = std::min(min_x, p.ref_x);
        max_x = std::max(max_x, p.ref_x);
        min_y = std::min(min_y, p.ref_y);
        max_y = std::max(max_y, p.ref_y);
    }
    const double count = static_cast<double>(n);
    double a[3][4] = {
        {spp, sx, sy, sxu},
        {sx, count, 0.0, su},
        {sy, 0.0, count, sv},
    };

    const EigenTriple eig = eigenvalues_sym3(Covariance3{spp, count, count, sx, sy, 0.0});
    const double condition = eig.l2 > 0 ? eig.l0 / eig.l2 : std::numeric_limits<double>::infinity();
    const bool clustered = (max_x - min_x) <= 1.0 && (max_y - min_y) <= 1.0;

    // Gaussian elimination with partial pivoting on the augmented 3x4 system.
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (pivot != col) std::swap(a[pivot], a[col]);
        if (std::abs(a[col][col]) <= 1e-12 * std::max(1.0, std::abs(spp))) {
            throw Error(ErrorKind::DegenerateFit, "reference points do not constrain the scale (all coincide)");
        }
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    double sol[3];
    for (int r = 2; r >= 0; --r) {
        double v = a[r][3];
        for (int c = r + 1; c < 3; ++c) v -= a[r][c] * sol[c];
        sol[r] = v / a[r][r];
    }

    const SimilarityTransform t{sol[0], sol[1], sol[2]};
    if (!(t.sigma > 0.0) || !std::isfinite(t.tx) || !std::isfinite(t.ty)) {
        throw Error(ErrorKind::DegenerateFit, "fitted scale " + std::to_string(t.sigma) + " is not positive");
    }

    double ss = 0;
    for (const auto& p : pairs) {
        const auto [u, v] = t.apply(p.ref_x, p.ref_y);
        ss += (u - p.mov_x) * (u - p.mov_x) + (v - p.mov_y) * (v - p.mov_y);
    }
    FitReport report;
    report.transform = t;
    report.rms_residual = std::sqrt(ss / (2.0 * count));
    report.n_points = static_cast<int>(n);
    report.condition_flag = condition > kConditionLimit || clustered;
    return report;
}

std::vector<PointPair> point_pairs(const std::vector<DisparityMatch>& matches, bool second)
{
    std::vector<PointPair> pairs;
    pairs.reserve(matches.size());
    for (const auto& m : matches) {
        const Offset d = second ? m.second : m.first;
        pairs.push_back({static_cast<double>(m.keypoint.x), static_cast<double>(m.keypoint.y),
                         static_cast<double>(m.keypoint.x + d.dx), static_cast<double>(m.keypoint.y + d.dy)});
    }
    return pairs;
}

std::array<ChannelFit, 2> fit_channels(const std::vector<DisparityMatch>& matches, ChannelId reference)
{
    const auto [first, second] = moving_channels(reference);
    const auto pairs_first = point_pairs(matches, false);
    const auto pairs_second = point_pairs(matches, true);
    return {ChannelFit{first, fit_similarity(pairs_first)}, ChannelFit{second, fit_similarity(pairs_second)}};
}

}  // namespace chromafix
