#include "chromafix/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace chromafix {

namespace {

using Colour = std::array<double, 3>;

class Canvas {
public:
    explicit Canvas(const RgbImage& image) : planes_{image.red(), image.green(), image.blue()} {}

    void plot(int x, int y, const Colour& c)
    {
        if (!planes_[0].contains(x, y)) return;
        for (int k = 0; k < 3; ++k) planes_[k].at(x, y) = c[k];
    }

    void line(double x0, double y0, double x1, double y1, const Colour& c)
    {
        const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))));
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            plot(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
        }
    }

    void cross(int x, int y, int arm, const Colour& c)
    {
        line(x - arm, y, x + arm, y, c);
        line(x, y - arm, x, y + arm, c);
    }

    RgbImage finish() { return RgbImage(std::move(planes_[0]), std::move(planes_[1]), std::move(planes_[2])); }

private:
    std::array<ScalarField, 3> planes_;
};

constexpr Colour kMarker{1.0, 0.0, 1.0};
constexpr Colour kFirst{0.0, 1.0, 1.0};
constexpr Colour kSecond{1.0, 1.0, 0.0};

}  // namespace

RgbImage draw_keypoints(const RgbImage& image, const std::vector<Keypoint>& kps, int arm)
{
    Canvas canvas(image);
    for (const auto& kp : kps) canvas.cross(kp.x, kp.y, arm, kMarker);
    return canvas.finish();
}

RgbImage draw_matches(const RgbImage& image, const std::vector<DisparityMatch>& matches, double exaggeration)
{
    Canvas canvas(image);
    for (const auto& m : matches) {
        const double x = m.keypoint.x;
        const double y = m.keypoint.y;
        canvas.cross(m.keypoint.x, m.keypoint.y, 3, kMarker);
        canvas.line(x, y, x + exaggeration * m.first.dx, y + exaggeration * m.first.dy, kFirst);
        canvas.line(x, y, x + exaggeration * m.second.dx, y + exaggeration * m.second.dy, kSecond);
    }
    return canvas.finish();
}

}  // namespace chromafix
