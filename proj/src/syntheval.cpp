#include "chromafix/syntheval.hpp"

#include "chromafix/collinearity.hpp"
#include "chromafix/error.hpp"
#include "chromafix/keypoints.hpp"
#include "chromafix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>

namespace chromafix {

void validate(const AberrationSpec& spec)
{
    for (const auto& t : spec.moving) {
        if (!std::isfinite(t.sigma) || !std::isfinite(t.tx) || !std::isfinite(t.ty)) {
            throw Error(ErrorKind::Validation, "aberration parameters must be finite");
        }
        if (t.sigma < kMinSpecSigma || t.sigma > kMaxSpecSigma) {
            throw Error(ErrorKind::Validation, "aberration scale " + std::to_string(t.sigma) + " outside [" +
                                                   std::to_string(kMinSpecSigma) + ", " +
                                                   std::to_string(kMaxSpecSigma) + "]");
        }
    }
}

RgbImage synthesize_aberration(const RgbImage& image, const AberrationSpec& spec)
{
    validate(spec);
    const auto [first, second] = moving_channels(spec.reference);
    const ScalarField a = warp_channel(image.channel(first), spec.moving[0].inverse());
    const ScalarField b = warp_channel(image.channel(second), spec.moving[1].inverse());
    return image.with_channel(first, a).with_channel(second, b);
}

double psnr(const RgbImage& a, const RgbImage& b, int border_crop)
{
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorKind::Size, "PSNR needs images of equal size");
    }
    const int c = std::max(border_crop, 0);
    const int x0 = c, x1 = a.width() - c;
    const int y0 = c, y1 = a.height() - c;
    if (x1 <= x0 || y1 <= y0) throw Error(ErrorKind::Size, "border crop leaves no pixels");

    double sum = 0;
    for (const ChannelId ch : kAllChannels) {
        const ScalarField& fa = a.channel(ch);
        const ScalarField& fb = b.channel(ch);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                const double d = fa.at(x, y) - fb.at(x, y);
                sum += d * d;
            }
        }
    }
    const double mse = sum / (3.0 * (x1 - x0) * static_cast<double>(y1 - y0));
    if (mse == 0.0) return kInfinitePsnr;
    return 10.0 * std::log10(1.0 / mse);
}

double mean_l(const RgbImage& image, int radius, double grad_percentile)
{
    const int w = image.width();
    const int h = image.height();
    if (radius < 1 || w < 2 * radius + 1 || h < 2 * radius + 1) {
        throw Error(ErrorKind::Size, "image too small for an L window of radius " + std::to_string(radius));
    }
    const ScalarField grad = gradient_magnitude(image);
    const double threshold = nonzero_percentile(grad, grad_percentile);

    std::vector<double> row_sum(h, 0.0);
    std::vector<long long> row_count(h, 0);
    parallel_for(radius, h - radius, [&](int y) {
        std::vector<ColourSample> samples;
        for (int x = radius; x < w - radius; ++x) {
            if (grad.at(x, y) < threshold) continue;
            gather_window(image, x, y, radius, ChannelShifts{}, samples);
            const LValue l = l_value(samples);
            if (l.defined()) {
                row_sum[y] += l.value();
                ++row_count[y];
            }
        }
    });
    double sum = 0;
    long long count = 0;
    for (int y = 0; y < h; ++y) {
        sum += row_sum[y];
        count += row_count[y];
    }
    if (count == 0) throw Error(ErrorKind::DegenerateNeighbourhood, "no pixel has a defined L");
    return sum / static_cast<double>(count);
}

namespace {

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Lattice value noise with quintic fade, one octave.
class ValueNoise {
public:
    ValueNoise(int width, int height, double cell, std::mt19937_64& rng)
        : cell_(cell), nx_(static_cast<int>(width / cell) + 3), ny_(static_cast<int>(height / cell) + 3),
          lattice_(static_cast<std::size_t>(nx_) * ny_)
    {
        for (double& v : lattice_) v = uniform01(rng);
    }

    double operator()(double x, double y) const noexcept
    {
        const double gx = x / cell_;
        const double gy = y / cell_;
        const int ix = static_cast<int>(gx);
        const int iy = static_cast<int>(gy);
        const double fx = fade(gx - ix);
        const double fy = fade(gy - iy);
        const double a = at(ix, iy), b = at(ix + 1, iy), c = at(ix, iy + 1), d = at(ix + 1, iy + 1);
        return (a + fx * (b - a)) + fy * ((c + fx * (d - c)) - (a + fx * (b - a)));
    }

private:
    static double fade(double t) noexcept { return t * t * t * (t * (t * 6 - 15) + 10); }
    double at(int x, int y) const noexcept { return lattice_[static_cast<std::size_t>(y) * nx_ + x]; }

    double cell_;
    int nx_, ny_;
    std::vector<double> lattice_;
};

class Fbm {
public:
    Fbm(int width, int height, std::mt19937_64& rng)
    {
        static constexpr double cells[] = {40, 20, 10, 5, 2.5};
        static constexpr double amps[] = {0.15, 0.20, 0.25, 0.25, 0.15};
        for (int i = 0; i < 5; ++i) {
            octaves_.emplace_back(width, height, cells[i], rng);
            amps_.push_back(amps[i]);
        }
    }

    // In [0, 1].
    double operator()(double x, double y) const noexcept
    {
        double v = 0;
        for (std::size_t i = 0; i < octaves_.size(); ++i) v += amps_[i] * octaves_[i](x, y);
        return v;
    }

private:
    std::vector<ValueNoise> octaves_;
    std::vector<double> amps_;
};

struct Shape {
    bool disc = false;
    double cx = 0, cy = 0, rx = 0, ry = 0;
    double level_a = 0, level_b = 0;

    bool contains(double x, double y) const noexcept
    {
        if (disc) {
            const double dx = (x - cx) / rx;
            const double dy = (y - cy) / ry;
            return dx * dx + dy * dy <= 1.0;
        }
        return std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
    }
};

}  // namespace

// Colours are w_a * c_a(p) + w_b * c_b(p): two chromatic directions that drift
// slowly over the image, weighted by textured scalar fields. Neighbourhoods
// are therefore close to planar through black in RGB (the two-line case of
// the colour-lines model) and L is near zero only where channels align. A
// single colour direction per region would not do: two moving channels that
// are affine copies of each other can then slide together at no cost in L.
RgbImage procedural_texture(int width, int height, std::uint64_t seed)
{
    if (width < 1 || height < 1) throw Error(ErrorKind::Size, "texture dimensions must be positive");
    std::mt19937_64 rng(seed);
    const Fbm s1(width, height, rng);
    const Fbm s2(width, height, rng);
    const Fbm d1(width, height, rng);
    const Fbm d2(width, height, rng);
    std::vector<ValueNoise> tint_a, tint_b;
    for (int c = 0; c < 3; ++c) tint_a.emplace_back(width, height, 200.0, rng);
    for (int c = 0; c < 3; ++c) tint_b.emplace_back(width, height, 200.0, rng);

    std::vector<Shape> shapes;
    const int shape_count = std::max(4, width * height / 4000);
    const double scale = std::min(width, height);
    for (int i = 0; i < shape_count; ++i) {
        Shape s;
        s.disc = uniform01(rng) < 0.5;
        s.cx = uniform01(rng) * width;
        s.cy = uniform01(rng) * height;
        s.rx = scale * (0.01 + 0.06 * uniform01(rng));
        s.ry = scale * (0.01 + 0.06 * uniform01(rng));
        s.level_a = uniform01(rng);
        s.level_b = uniform01(rng);
        shapes.push_back(s);
    }

    ScalarField r(width, height), g(width, height), b(width, height);
    ScalarField* planes[3] = {&r, &g, &b};
    parallel_for(0, height, [&](int y) {
        for (int x = 0; x < width; ++x) {
            double wa = s1(x, y);
            double wb = s2(x, y);
            // Later shapes paint over earlier ones.
            for (const Shape& s : shapes) {
                if (!s.contains(x, y)) continue;
                wa = 0.6 * s.level_a + 0.4 * d1(x, y);
                wb = 0.6 * s.level_b + 0.4 * d2(x, y);
            }
            for (int c = 0; c < 3; ++c) {
                const double ca = 0.1 + 0.5 * tint_a[c](x, y);
                const double cb = 0.1 + 0.5 * tint_b[c](x, y);
                planes[c]->at(x, y) = std::clamp(0.04 + 0.75 * (ca * wa + cb * wb), 0.0, 1.0);
            }
        }
    });
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

std::vector<AberrationSpec> default_sweep(ChannelId reference)
{
    static constexpr double scales[] = {0.996, 1.0, 1.004};
    static constexpr double shifts[] = {-2.5, 0.0, 2.5};
    std::vector<AberrationSpec> out;
    for (int a = 0; a < 3; ++a) {
        for (int k = 0; k < 3; ++k) {
            AberrationSpec spec;
            spec.reference = reference;
            // Opposite scales and rotated shift pairs; (t_x, t_y) is never (0, 0).
            spec.moving[0] = {scales[a], shifts[k], shifts[(k + 1) % 3]};
            spec.moving[1] = {scales[2 - a], shifts[(k + 2) % 3], shifts[k]};
            out.push_back(spec);
        }
    }
    return out;
}

EvalReport evaluate_case(const RgbImage& original, const AberrationSpec& spec, const PipelineConfig& cfg)
{
    PipelineConfig run = cfg;
    run.reference = spec.reference;
    const RgbImage aberrated = synthesize_aberration(original, spec);
    const CorrectionResult result = correct_image(aberrated, run);

    EvalReport report;
    report.spec = spec;
    report.recovered = result.transforms;
    for (int i = 0; i < 2; ++i) {
        const SimilarityTransform& est = result.transforms[i].report.transform;
        const SimilarityTransform& truth = spec.moving[i];
        report.errors[i].sigma = std::abs(est.sigma - truth.sigma);
        report.errors[i].translation = std::hypot(est.tx - truth.tx, est.ty - truth.ty);
    }
    report.psnr_before = psnr(aberrated, original, run.border_crop);
    report.psnr_db = psnr(result.corrected, original, run.border_crop);
    report.mean_l_original = mean_l(original, run.window_radius, run.grad_percentile);
    report.mean_l_before = mean_l(aberrated, run.window_radius, run.grad_percentile);
    report.mean_l_after = mean_l(result.corrected, run.window_radius, run.grad_percentile);
    report.diagnostics = result.diagnostics;
    return report;
}

void write_suite_csv(std::ostream& out, const std::vector<EvalReport>& reports)
{
    out << "case,reference,channel_1,sigma_1,tx_1,ty_1,channel_2,sigma_2,tx_2,ty_2,"
           "est_sigma_1,est_tx_1,est_ty_1,est_sigma_2,est_tx_2,est_ty_2,"
           "err_sigma_1,err_t_1,err_sigma_2,err_t_2,"
           "psnr_before,psnr_after,mean_l_before,mean_l_after,survivors\n";
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << std::setprecision(10);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const EvalReport& r = reports[i];
        out << i << ',' << to_string(r.spec.reference);
        for (int c = 0; c < 2; ++c) {
            const auto& t = r.spec.moving[c];
            out << ',' << to_string(r.recovered[c].channel) << ',' << t.sigma << ',' << t.tx << ',' << t.ty;
        }
        for (int c = 0; c < 2; ++c) {
            const auto& t = r.recovered[c].report.transform;
            out << ',' << t.sigma << ',' << t.tx << ',' << t.ty;
        }
        for (int c = 0; c < 2; ++c) out << ',' << r.errors[c].sigma << ',' << r.errors[c].translation;
        out << ',' << r.psnr_before << ',' << r.psnr_db << ',' << r.mean_l_before << ',' << r.mean_l_after << ','
            << r.diagnostics.survivors << '\n';
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

}  // namespace chromafix
