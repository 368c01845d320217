#include "chromafix/collinearity.hpp"

#include "chromafix/error.hpp"
#include "chromafix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace chromafix {

double Covariance3::at(int i, int j) const noexcept
{
    if (i > j) std::swap(i, j);
    if (i == j) return i == 0 ? rr : (i == 1 ? gg : bb);
    if (i == 0) return j == 1 ? rg : rb;
    return gb;
}

double Covariance3::determinant() const noexcept
{
    return rr * (gg * bb - gb * gb) - rg * (rg * bb - gb * rb) + rb * (rg * gb - gg * rb);
}

Covariance3 accumulate_covariance(std::span<const ColourSample> samples)
{
    const std::size_t n = samples.size();
    if (n < 2) {
        throw Error(ErrorKind::InsufficientData, "covariance needs at least 2 samples, got " + std::to_string(n));
    }

    // Offsets from the first sample keep constant channels exactly zero.
    const ColourSample& origin = samples[0];
    double mean[3] = {0, 0, 0};
    for (const auto& s : samples) {
        mean[0] += s[0] - origin[0];
        mean[1] += s[1] - origin[1];
        mean[2] += s[2] - origin[2];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& m : mean) m *= inv_n;

    Covariance3 c;
    for (const auto& s : samples) {
        const double dr = (s[0] - origin[0]) - mean[0];
        const double dg = (s[1] - origin[1]) - mean[1];
        const double db = (s[2] - origin[2]) - mean[2];
        c.rr += dr * dr;
        c.gg += dg * dg;
        c.bb += db * db;
        c.rg += dr * dg;
        c.rb += dr * db;
        c.gb += dg * db;
    }
    c.rr *= inv_n;
    c.gg *= inv_n;
    c.bb *= inv_n;
    c.rg *= inv_n;
    c.rb *= inv_n;
    c.gb *= inv_n;
    return c;
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& a, const Vec3& b) noexcept
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 times(const Covariance3& a, const Vec3& v) noexcept
{
    return {a.rr * v[0] + a.rg * v[1] + a.rb * v[2], a.rg * v[0] + a.gg * v[1] + a.gb * v[2],
            a.rb * v[0] + a.gb * v[1] + a.bb * v[2]};
}

// Unit eigenvector for a simple eigenvalue: the longest cross product of two
// rows of (A - lambda I). False when all three vanish.
bool eigenvector(const Covariance3& a, double lambda, Vec3& out) noexcept
{
    const Vec3 r0{a.rr - lambda, a.rg, a.rb};
    const Vec3 r1{a.rg, a.gg - lambda, a.gb};
    const Vec3 r2{a.rb, a.gb, a.bb - lambda};
    const Vec3 c[3] = {cross(r0, r1), cross(r0, r2), cross(r1, r2)};
    int best = 0;
    double best_n = dot(c[0], c[0]);
    for (int i = 1; i < 3; ++i) {
        const double n = dot(c[i], c[i]);
        if (n > best_n) {
            best = i;
            best_n = n;
        }
    }
    if (!(best_n > 0.0)) return false;
    const double inv = 1.0 / std::sqrt(best_n);
    out = {c[best][0] * inv, c[best][1] * inv, c[best][2] * inv};
    return true;
}

}  // namespace

EigenTriple eigenvalues_sym3(const Covariance3& a) noexcept
{
    double e[3];
    const double off = a.rg * a.rg + a.rb * a.rb + a.gb * a.gb;
    const double q = a.trace() / 3.0;
    if (off == 0.0) {
        e[0] = a.rr;
        e[1] = a.gg;
        e[2] = a.bb;
    } else {
        // Shift by the mean eigenvalue and rescale so the deviatoric part B has
        // unit scale; det(B)/2 is then the cosine of 3 phi.
        const double d0 = a.rr - q;
        const double d1 = a.gg - q;
        const double d2 = a.bb - q;
        const double p = std::sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off) / 6.0);
        const double inv_p = 1.0 / p;
        const double b00 = d0 * inv_p, b11 = d1 * inv_p, b22 = d2 * inv_p;
        const double b01 = a.rg * inv_p, b02 = a.rb * inv_p, b12 = a.gb * inv_p;
        const double det_b = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02);
        const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        e[0] = q + 2.0 * p * std::cos(phi);
        e[2] = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
        e[1] = 3.0 * q - e[0] - e[2];

        // Near r = +-1 the two closest roots lose half their digits through
        // acos. The third one is accurate; deflate it and solve the remaining
        // 2x2 block on the orthogonal complement.
        const double isolated = r >= 0.0 ? e[0] : e[2];
        Vec3 v;
        if (eigenvector(a, isolated, v)) {
            Vec3 u = std::fabs(v[0]) > std::fabs(v[1]) ? Vec3{-v[2], 0.0, v[0]} : Vec3{0.0, v[2], -v[1]};
            const double un = 1.0 / std::sqrt(dot(u, u));
            u = {u[0] * un, u[1] * un, u[2] * un};
            const Vec3 w = cross(v, u);
            const Vec3 au = times(a, u), aw = times(a, w);
            const double m00 = dot(u, au), m11 = dot(w, aw), m01 = dot(u, aw);
            const double mid = 0.5 * (m00 + m11);
            const double h = std::hypot(0.5 * (m00 - m11), m01);
            e[0] = isolated;
            e[1] = mid + h;
            e[2] = mid - h;
        }
    }
    std::sort(e, e + 3, [](double x, double y) { return x > y; });
    for (double& v : e) {
        if (v < 0.0 && v > -kEigenEpsilon) v = 0.0;
    }
    return {e[0], e[1], e[2]};
}

LValue l_value(const Covariance3& cov) noexcept
{
    const double denom = cov.variance_product();
    if (!(denom >= kVarianceProductFloor)) return LValue::undefined();
    return LValue::of(eigenvalues_sym3(cov).product() / denom);
}

LValue l_value(std::span<const ColourSample> samples)
{
    return l_value(accumulate_covariance(samples));
}

ChannelShifts make_shifts(ChannelId reference, Offset first, Offset second) noexcept
{
    ChannelShifts shifts{};
    const auto [a, b] = moving_channels(reference);
    shifts[index_of(a)] = first;
    shifts[index_of(b)] = second;
    return shifts;
}

void gather_window(const RgbImage& image, int x, int y, int radius, const ChannelShifts& shifts,
                   std::vector<ColourSample>& out)
{
    const int w = image.width();
    const int h = image.height();
    for (int c = 0; c < 3; ++c) {
        const int cx = x + shifts[c].dx;
        const int cy = y + shifts[c].dy;
        if (cx - radius < 0 || cy - radius < 0 || cx + radius >= w || cy + radius >= h) {
            throw Error(ErrorKind::Bounds, "window of radius " + std::to_string(radius) + " at (" + std::to_string(cx) +
                                               "," + std::to_string(cy) + ") leaves the " + std::to_string(w) + "x" +
                                               std::to_string(h) + " image");
        }
    }

    const ScalarField* planes[3] = {&image.red(), &image.green(), &image.blue()};
    out.clear();
    out.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int j = -radius; j <= radius; ++j) {
        for (int i = -radius; i <= radius; ++i) {
            ColourSample s;
            for (int c = 0; c < 3; ++c) {
                s[c] = planes[c]->at(x + shifts[c].dx + i, y + shifts[c].dy + j);
            }
            out.push_back(s);
        }
    }
}

LValue l_at(const RgbImage& image, int x, int y, int radius, const ChannelShifts& shifts)
{
    thread_local std::vector<ColourSample> samples;
    gather_window(image, x, y, radius, shifts, samples);
    return l_value(samples);
}

LValue l_at(const RgbImage& image, int x, int y, int radius, Offset dg, Offset db)
{
    return l_at(image, x, y, radius, make_shifts(ChannelId::Red, dg, db));
}

LMap l_map(const RgbImage& image, int radius)
{
    const int w = image.width();
    const int h = image.height();
    const int side = 2 * radius + 1;
    if (radius < 1 || w < side || h < side) {
        throw Error(ErrorKind::Size, "image " + std::to_string(w) + "x" + std::to_string(h) +
                                         " is smaller than a window of radius " + std::to_string(radius));
    }

    LMap map{ScalarField(w, h, 0.0), Mask(w, h, 0)};
    const ChannelShifts zero{};
    parallel_for(radius, h - radius, [&](int y) {
        std::vector<ColourSample> samples;
        for (int x = radius; x < w - radius; ++x) {
            gather_window(image, x, y, radius, zero, samples);
            const LValue l = l_value(samples);
            if (l.defined()) {
                map.values.at(x, y) = l.value();
                map.defined.at(x, y) = 1;
            }
        }
    });
    return map;
}

RgbImage render_lmap(const LMap& map, bool colour_debug, double gain)
{
    const int w = map.values.width();
    const int h = map.values.height();
    ScalarField r(w, h), g(w, h), b(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (map.defined.at(x, y)) {
                const double v = std::clamp(map.values.at(x, y) * gain, 0.0, 1.0);
                r.at(x, y) = g.at(x, y) = b.at(x, y) = v;
            } else if (colour_debug) {
                r.at(x, y) = 1.0;
                b.at(x, y) = 1.0;
            }
        }
    }
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

}  // namespace chromafix
