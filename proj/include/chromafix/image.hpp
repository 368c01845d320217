#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

namespace chromafix {

enum class ChannelId : int { Red = 0, Green = 1, Blue = 2 };

inline constexpr std::array<ChannelId, 3> kAllChannels{ChannelId::Red, ChannelId::Green, ChannelId::Blue};

constexpr int index_of(ChannelId c) noexcept { return static_cast<int>(c); }
std::string_view to_string(ChannelId c) noexcept;
// Accepts "red"/"green"/"blue" and the single letters r/g/b, case-insensitive.
ChannelId parse_channel(std::string_view text);

// The two channels that are not `reference`, in ChannelId order.
std::pair<ChannelId, ChannelId> moving_channels(ChannelId reference) noexcept;

// Row-major 2D grid of values.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill)
    {
    }
    Grid(int width, int height, std::vector<T> values)
        : width_(width), height_(height), values_(std::move(values))
    {
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool same_shape(int width, int height) const noexcept { return width_ == width && height_ == height; }
    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return same_shape(other.width(), other.height());
    }

    T& at(int x, int y) noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }

    const T* row(int y) const noexcept { return values_.data() + static_cast<std::size_t>(y) * width_; }
    T* row(int y) noexcept { return values_.data() + static_cast<std::size_t>(y) * width_; }

    const std::vector<T>& values() const noexcept { return values_; }
    std::vector<T>& values() noexcept { return values_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> values_;
};

using ScalarField = Grid<double>;
// Nonzero = usable.
using Mask = Grid<std::uint8_t>;

// Three planar channels of intensities in [0,1]. Immutable once built; the
// constructor checks matching dimensions, non-empty size and the value range.
class RgbImage {
public:
    RgbImage(ScalarField red, ScalarField green, ScalarField blue);

    int width() const noexcept { return channels_[0].width(); }
    int height() const noexcept { return channels_[0].height(); }

    const ScalarField& channel(ChannelId c) const noexcept { return channels_[index_of(c)]; }
    const ScalarField& red() const noexcept { return channels_[0]; }
    const ScalarField& green() const noexcept { return channels_[1]; }
    const ScalarField& blue() const noexcept { return channels_[2]; }

    // Copy with one channel replaced.
    RgbImage with_channel(ChannelId c, ScalarField field) const;

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::array<ScalarField, 3> channels_;
};

// Decodes PNG (8/16-bit, gray/RGB/palette, alpha dropped) or binary PPM (P6).
RgbImage load_image(const std::filesystem::path& path);
// Writes 8-bit PNG, or P6 PPM when the extension is .ppm.
void save_image(const RgbImage& image, const std::filesystem::path& path);

double luminance(double r, double g, double b) noexcept;

// Norm of the central-difference gradient of luminance; one-sided at borders.
ScalarField gradient_magnitude(const RgbImage& image);

// Unusable wherever a pixel within Chebyshev distance `dilation_radius` has any
// channel at or above `sat_threshold`.
Mask saturation_mask(const RgbImage& image, double sat_threshold, int dilation_radius);

// Bilinear sample with edge-clamped coordinates.
double sample_bilinear(const ScalarField& channel, double x, double y) noexcept;

}  // namespace chromafix
