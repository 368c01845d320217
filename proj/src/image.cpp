#include "chromafix/image.hpp"

#include "chromafix/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace chromafix {

std::string_view to_string(ChannelId c) noexcept
{
    switch (c) {
    case ChannelId::Red: return "red";
    case ChannelId::Green: return "green";
    case ChannelId::Blue: return "blue";
    }
    return "?";
}

ChannelId parse_channel(std::string_view text)
{
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "red" || lower == "r") return ChannelId::Red;
    if (lower == "green" || lower == "g") return ChannelId::Green;
    if (lower == "blue" || lower == "b") return ChannelId::Blue;
    throw Error(ErrorKind::Parse, "unknown channel '" + std::string(text) + "' (expected red, green or blue)");
}

std::pair<ChannelId, ChannelId> moving_channels(ChannelId reference) noexcept
{
    switch (reference) {
    case ChannelId::Red: return {ChannelId::Green, ChannelId::Blue};
    case ChannelId::Green: return {ChannelId::Red, ChannelId::Blue};
    case ChannelId::Blue: return {ChannelId::Red, ChannelId::Green};
    }
    return {ChannelId::Red, ChannelId::Blue};
}

RgbImage::RgbImage(ScalarField red, ScalarField green, ScalarField blue)
    : channels_{std::move(red), std::move(green), std::move(blue)}
{
    const int w = channels_[0].width();
    const int h = channels_[0].height();
    if (w < 1 || h < 1) {
        throw Error(ErrorKind::Size, "image dimensions must be at least 1x1");
    }
    for (const auto& ch : channels_) {
        if (!ch.same_shape(w, h) || ch.size() != static_cast<std::size_t>(w) * h) {
            throw Error(ErrorKind::Size, "channel dimensions differ");
        }
        for (double v : ch.values()) {
            // Negated form also rejects NaN.
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorKind::Validation, "intensity outside [0,1]: " + std::to_string(v));
            }
        }
    }
}

RgbImage RgbImage::with_channel(ChannelId c, ScalarField field) const
{
    std::array<ScalarField, 3> copy = channels_;
    copy[index_of(c)] = std::move(field);
    return RgbImage(std::move(copy[0]), std::move(copy[1]), std::move(copy[2]));
}

double luminance(double r, double g, double b) noexcept
{
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

ScalarField gradient_magnitude(const RgbImage& image)
{
    const int w = image.width();
    const int h = image.height();
    ScalarField lum(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            lum.at(x, y) = luminance(image.red().at(x, y), image.green().at(x, y), image.blue().at(x, y));
        }
    }

    // Central difference inside, one-sided at the borders, zero along an axis of length 1.
    auto diff = [](double prev, double here, double next, bool has_prev, bool has_next) {
        if (has_prev && has_next) return 0.5 * (next - prev);
        if (has_next) return next - here;
        if (has_prev) return here - prev;
        return 0.0;
    };

    ScalarField grad(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double here = lum.at(x, y);
            const bool left = x > 0;
            const bool right = x + 1 < w;
            const bool up = y > 0;
            const bool down = y + 1 < h;
            const double gx = diff(left ? lum.at(x - 1, y) : here, here, right ? lum.at(x + 1, y) : here, left, right);
            const double gy = diff(up ? lum.at(x, y - 1) : here, here, down ? lum.at(x, y + 1) : here, up, down);
            grad.at(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return grad;
}

Mask saturation_mask(const RgbImage& image, double sat_threshold, int dilation_radius)
{
    const int w = image.width();
    const int h = image.height();
    const int r = std::max(dilation_radius, 0);

    Grid<int> saturated(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool hit = image.red().at(x, y) >= sat_threshold || image.green().at(x, y) >= sat_threshold ||
                             image.blue().at(x, y) >= sat_threshold;
            saturated.at(x, y) = hit ? 1 : 0;
        }
    }

    // The Chebyshev ball is a square, so dilation separates into a row pass and a
    // column pass, each a windowed count over a prefix sum.
    Grid<int> horizontal(w, h, 0);
    std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
    for (int y = 0; y < h; ++y) {
        prefix[0] = 0;
        for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + saturated.at(x, y);
        for (int x = 0; x < w; ++x) {
            const int lo = std::max(0, x - r);
            const int hi = std::min(w - 1, x + r);
            horizontal.at(x, y) = prefix[hi + 1] - prefix[lo] > 0 ? 1 : 0;
        }
    }

    Mask usable(w, h, 1);
    for (int x = 0; x < w; ++x) {
        prefix[0] = 0;
        for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + horizontal.at(x, y);
        for (int y = 0; y < h; ++y) {
            const int lo = std::max(0, y - r);
            const int hi = std::min(h - 1, y + r);
            if (prefix[hi + 1] - prefix[lo] > 0) usable.at(x, y) = 0;
        }
    }
    return usable;
}

double sample_bilinear(const ScalarField& channel, double x, double y) noexcept
{
    const int w = channel.width();
    const int h = channel.height();
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    // Also maps NaN coordinates onto the origin rather than reading garbage.
    if (!(x >= 0.0)) x = 0.0;
    if (!(y >= 0.0)) y = 0.0;

    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;

    const double v00 = channel.at(x0, y0);
    const double v10 = channel.at(x1, y0);
    const double v01 = channel.at(x0, y1);
    const double v11 = channel.at(x1, y1);

    const double top = v00 + fx * (v10 - v00);
    const double bottom = v01 + fx * (v11 - v01);
    const double value = top + fy * (bottom - top);

    // Rounding may step a hair outside the neighbours' hull.
    const double lo = std::min({v00, v10, v01, v11});
    const double hi = std::max({v00, v10, v01, v11});
    return std::clamp(value, lo, hi);
}

}  // namespace chromafix
