#pragma once

#include "chromafix/image.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace chromafix {

// Numerical slack for eigenvalue clamping and the L range.
inline constexpr double kEigenEpsilon = 1e-12;
// Below this product of channel variances, L is Undefined.
inline constexpr double kVarianceProductFloor = 1e-12;

// One (r, g, b) point of a neighbourhood's colour cloud.
using ColourSample = std::array<double, 3>;

// Integer pixel offset.
struct Offset {
    int dx = 0;
    int dy = 0;

    friend bool operator==(const Offset&, const Offset&) = default;
};

// Symmetric 3x3 covariance of (r, g, b); only the six unique entries are stored.
struct Covariance3 {
    double rr = 0, gg = 0, bb = 0;
    double rg = 0, rb = 0, gb = 0;

    double at(int i, int j) const noexcept;
    double trace() const noexcept { return rr + gg + bb; }
    double determinant() const noexcept;
    double variance_product() const noexcept { return rr * gg * bb; }
};

// Eigenvalues, largest first.
struct EigenTriple {
    double l0 = 0, l1 = 0, l2 = 0;

    double product() const noexcept { return l0 * l1 * l2; }
};

// The collinearity score of a neighbourhood, or Undefined when some channel is
// (numerically) constant over it.
class LValue {
public:
    LValue() = default;
    static LValue undefined() noexcept { return LValue(); }
    static LValue of(double v) noexcept
    {
        LValue l;
        l.value_ = v;
        return l;
    }

    bool defined() const noexcept { return value_.has_value(); }
    // Precondition: defined().
    double value() const noexcept { return *value_; }
    double value_or(double fallback) const noexcept { return value_.value_or(fallback); }

    friend bool operator==(const LValue&, const LValue&) = default;

private:
    std::optional<double> value_;
};

struct LMap {
    ScalarField values;  // 0 where undefined
    Mask defined;        // nonzero where values holds a defined L
};

// Population covariance (divides by n), two-pass. Throws InsufficientData for n < 2.
Covariance3 accumulate_covariance(std::span<const ColourSample> samples);

// Closed-form (trigonometric) eigenvalues of a symmetric 3x3 matrix.
EigenTriple eigenvalues_sym3(const Covariance3& cov) noexcept;

// L = l0 l1 l2 / (var_r var_g var_b) of the sample cloud.
LValue l_value(std::span<const ColourSample> samples);
LValue l_value(const Covariance3& cov) noexcept;

// Per-channel window offsets, indexed by ChannelId.
using ChannelShifts = std::array<Offset, 3>;

// Builds shifts with the reference channel fixed and the two moving channels
// (in ChannelId order) displaced by `first` and `second`.
ChannelShifts make_shifts(ChannelId reference, Offset first, Offset second) noexcept;

// Gathers the (2 radius + 1)^2 triples whose channel c is read at
// (x + i + shifts[c].dx, y + j + shifts[c].dy). Throws Bounds if any window
// leaves the image.
void gather_window(const RgbImage& image, int x, int y, int radius, const ChannelShifts& shifts,
                   std::vector<ColourSample>& out);

// L over the shifted windows around (x, y).
LValue l_at(const RgbImage& image, int x, int y, int radius, const ChannelShifts& shifts);
// Red-fixed form: green shifted by dg, blue by db.
LValue l_at(const RgbImage& image, int x, int y, int radius, Offset dg, Offset db);

// L at zero disparity for every pixel whose window fits. Pixels within
// `radius` of the border are flagged undefined. Throws Size if the image is
// smaller than one window.
LMap l_map(const RgbImage& image, int radius);

// Grayscale rendering: L * gain clamped to [0,1]. Undefined pixels are black,
// or magenta when `colour_debug` is set.
RgbImage render_lmap(const LMap& map, bool colour_debug = false, double gain = 1.0);

}  // namespace chromafix
