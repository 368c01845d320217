#include "chromafix/disparity.hpp"

#include "chromafix/error.hpp"
#include "chromafix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>

namespace chromafix {

namespace {

int norm2(Offset d) noexcept
{
    return d.dx * d.dx + d.dy * d.dy;
}

// Candidates whose screened L lies within this of the screened minimum are
// re-evaluated exactly. Screening and exact L differ by ~1e-13 at worst.
constexpr double kScreenSlack = 1e-9;

struct Best {
    bool found = false;
    double l = 0;
    Offset first, second;

    void offer(double l_new, Offset f, Offset s) noexcept
    {
        if (!found || better_candidate(l_new, f, s, l, first, second)) {
            found = true;
            l = l_new;
            first = f;
            second = s;
        }
    }
};

void check_margin(const RgbImage& image, const Keypoint& kp, const SearchConfig& cfg)
{
    const int margin = cfg.window_radius + cfg.radius_px;
    if (kp.x - margin < 0 || kp.y - margin < 0 || kp.x + margin >= image.width() || kp.y + margin >= image.height()) {
        throw Error(ErrorKind::Bounds, "keypoint (" + std::to_string(kp.x) + "," + std::to_string(kp.y) +
                                           ") lacks a margin of " + std::to_string(margin) + " px");
    }
}

// Moving-channel windows for every disparity, centred by a per-channel constant
// so the raw-moment covariance formula does not cancel catastrophically.
struct ShiftedWindows {
    int n = 0;                   // samples per window
    std::vector<double> values;  // [disparity][sample]
    std::vector<double> sum, sum_sq, sum_ref;
};

ShiftedWindows build_windows(const ScalarField& channel, const std::vector<double>& ref, int x, int y,
                             const SearchConfig& cfg, const std::vector<Offset>& disparities)
{
    const int w = cfg.window_radius;
    const int s = cfg.radius_px;
    double centre = 0;
    int count = 0;
    for (int j = -w - s; j <= w + s; ++j) {
        for (int i = -w - s; i <= w + s; ++i) {
            centre += channel.at(x + i, y + j);
            ++count;
        }
    }
    centre /= count;

    ShiftedWindows out;
    out.n = static_cast<int>(ref.size());
    const std::size_t m = disparities.size();
    out.values.resize(m * out.n);
    out.sum.assign(m, 0.0);
    out.sum_sq.assign(m, 0.0);
    out.sum_ref.assign(m, 0.0);
    for (std::size_t d = 0; d < m; ++d) {
        double* row = out.values.data() + d * out.n;
        int k = 0;
        double s1 = 0, s2 = 0, sr = 0;
        for (int j = -w; j <= w; ++j) {
            for (int i = -w; i <= w; ++i) {
                const double v = channel.at(x + disparities[d].dx + i, y + disparities[d].dy + j) - centre;
                row[k] = v;
                s1 += v;
                s2 += v * v;
                sr += v * ref[k];
                ++k;
            }
        }
        out.sum[d] = s1;
        out.sum_sq[d] = s2;
        out.sum_ref[d] = sr;
    }
    return out;
}

double dot(const double* a, const double* b, int n) noexcept
{
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    int k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

DisparityMatch joint_search(const RgbImage& image, const Keypoint& kp, const SearchConfig& cfg, ChannelId reference)
{
    const auto [first_ch, second_ch] = moving_channels(reference);
    const int w = cfg.window_radius;
    const int s = cfg.radius_px;

    std::vector<Offset> disparities;
    for (int dy = -s; dy <= s; ++dy) {
        for (int dx = -s; dx <= s; ++dx) disparities.push_back({dx, dy});
    }
    const int m = static_cast<int>(disparities.size());

    // Reference window, centred on its own mean.
    const ScalarField& ref_ch = image.channel(reference);
    std::vector<double> ref;
    ref.reserve(static_cast<std::size_t>(2 * w + 1) * (2 * w + 1));
    for (int j = -w; j <= w; ++j) {
        for (int i = -w; i <= w; ++i) ref.push_back(ref_ch.at(kp.x + i, kp.y + j));
    }
    double ref_mean = 0;
    for (double v : ref) ref_mean += v;
    ref_mean /= static_cast<double>(ref.size());
    double ref_var = 0;
    for (double& v : ref) {
        v -= ref_mean;
        ref_var += v * v;
    }
    const int n = static_cast<int>(ref.size());
    const double inv_n = 1.0 / n;
    ref_var *= inv_n;

    const ShiftedWindows a = build_windows(image.channel(first_ch), ref, kp.x, kp.y, cfg, disparities);
    const ShiftedWindows b = build_windows(image.channel(second_ch), ref, kp.x, kp.y, cfg, disparities);

    // Reference mean is exactly zero after centring, so cov(ref, c) = sum_ref / n.
    std::vector<double> var_a(m), var_b(m), cov_ra(m), cov_rb(m), mean_a(m), mean_b(m);
    for (int d = 0; d < m; ++d) {
        mean_a[d] = a.sum[d] * inv_n;
        mean_b[d] = b.sum[d] * inv_n;
        var_a[d] = a.sum_sq[d] * inv_n - mean_a[d] * mean_a[d];
        var_b[d] = b.sum_sq[d] * inv_n - mean_b[d] * mean_b[d];
        cov_ra[d] = a.sum_ref[d] * inv_n;
        cov_rb[d] = b.sum_ref[d] * inv_n;
    }

    // Screened L = det(C) / (var_r var_a var_b) over the whole 4D grid.
    std::vector<double> screened(static_cast<std::size_t>(m) * m, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> borderline(static_cast<std::size_t>(m) * m, 0);
    double screened_min = std::numeric_limits<double>::infinity();
    for (int da = 0; da < m; ++da) {
        const double* row_a = a.values.data() + static_cast<std::size_t>(da) * n;
        for (int db = 0; db < m; ++db) {
            const double cov_ab = dot(row_a, b.values.data() + static_cast<std::size_t>(db) * n, n) * inv_n -
                                  mean_a[da] * mean_b[db];
            const double denom = ref_var * var_a[da] * var_b[db];
            const std::size_t idx = static_cast<std::size_t>(da) * m + db;
            if (!(denom >= kVarianceProductFloor)) {
                if (denom >= 0.5 * kVarianceProductFloor) borderline[idx] = 1;
                continue;
            }
            const double det = ref_var * (var_a[da] * var_b[db] - cov_ab * cov_ab) -
                               cov_ra[da] * (cov_ra[da] * var_b[db] - cov_ab * cov_rb[db]) +
                               cov_rb[db] * (cov_ra[da] * cov_ab - var_a[da] * cov_rb[db]);
            const double l = det / denom;
            screened[idx] = l;
            screened_min = std::min(screened_min, l);
        }
    }

    // Exact re-evaluation of the near-minimal set decides the winner, so the
    // result is identical to a plain scan with l_at.
    Best best;
    auto evaluate = [&](int da, int db) {
        const LValue l = l_at(image, kp.x, kp.y, w, make_shifts(reference, disparities[da], disparities[db]));
        if (l.defined()) best.offer(l.value(), disparities[da], disparities[db]);
    };
    for (int da = 0; da < m; ++da) {
        for (int db = 0; db < m; ++db) {
            const std::size_t idx = static_cast<std::size_t>(da) * m + db;
            if (borderline[idx] || screened[idx] <= screened_min + kScreenSlack) evaluate(da, db);
        }
    }
    if (!best.found) {
        for (int da = 0; da < m; ++da) {
            for (int db = 0; db < m; ++db) evaluate(da, db);
        }
    }
    if (!best.found) {
        throw Error(ErrorKind::DegenerateNeighbourhood, "L is undefined for every disparity at (" +
                                                            std::to_string(kp.x) + "," + std::to_string(kp.y) + ")");
    }
    return DisparityMatch{kp, best.first, best.second, best.l};
}

DisparityMatch sequential_search(const RgbImage& image, const Keypoint& kp, const SearchConfig& cfg,
                                 ChannelId reference)
{
    const int w = cfg.window_radius;
    const int s = cfg.radius_px;
    const Offset zero{};

    Best first_pass;
    for (int dy = -s; dy <= s; ++dy) {
        for (int dx = -s; dx <= s; ++dx) {
            const LValue l = l_at(image, kp.x, kp.y, w, make_shifts(reference, {dx, dy}, zero));
            if (l.defined()) first_pass.offer(l.value(), {dx, dy}, zero);
        }
    }
    if (!first_pass.found) {
        throw Error(ErrorKind::DegenerateNeighbourhood, "L is undefined for every disparity at (" +
                                                            std::to_string(kp.x) + "," + std::to_string(kp.y) + ")");
    }

    Best second_pass;
    for (int dy = -s; dy <= s; ++dy) {
        for (int dx = -s; dx <= s; ++dx) {
            const LValue l = l_at(image, kp.x, kp.y, w, make_shifts(reference, first_pass.first, {dx, dy}));
            if (l.defined()) second_pass.offer(l.value(), first_pass.first, {dx, dy});
        }
    }
    return DisparityMatch{kp, second_pass.first, second_pass.second, second_pass.l};
}

}  // namespace

bool better_candidate(double l_a, Offset first_a, Offset second_a, double l_b, Offset first_b, Offset second_b) noexcept
{
    if (l_a != l_b) return l_a < l_b;
    const int na = norm2(first_a) + norm2(second_a);
    const int nb = norm2(first_b) + norm2(second_b);
    if (na != nb) return na < nb;
    return std::tie(first_a.dx, first_a.dy, second_a.dx, second_a.dy) <
           std::tie(first_b.dx, first_b.dy, second_b.dx, second_b.dy);
}

DisparityMatch search_match(const RgbImage& image, const Keypoint& kp, const SearchConfig& cfg, ChannelId reference)
{
    if (cfg.radius_px < 1 || cfg.window_radius < 1) {
        throw Error(ErrorKind::Validation, "search radius must be >= 1 and window radius >= 1");
    }
    check_margin(image, kp, cfg);
    return cfg.joint ? joint_search(image, kp, cfg, reference) : sequential_search(image, kp, cfg, reference);
}

MatchSet match_all(const RgbImage& image, const std::vector<Keypoint>& kps, const SearchConfig& cfg,
                   ChannelId reference)
{
    std::vector<std::optional<DisparityMatch>> found(kps.size());
    std::vector<std::string> reasons(kps.size());
    parallel_for(0, static_cast<int>(kps.size()), [&](int i) {
        try {
            found[i] = search_match(image, kps[i], cfg, reference);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateNeighbourhood) throw;
            reasons[i] = e.detail();
        }
    });

    MatchSet out;
    for (std::size_t i = 0; i < kps.size(); ++i) {
        if (found[i]) {
            out.matches.push_back(*found[i]);
        } else {
            out.dropped.push_back({i, reasons[i]});
        }
    }
    if (!kps.empty() && out.matches.empty()) {
        throw Error(ErrorKind::InsufficientMatches, "every keypoint had a degenerate neighbourhood");
    }
    return out;
}

}  // namespace chromafix
