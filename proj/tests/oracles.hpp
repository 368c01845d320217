// Independent reference implementations used to check the library.
// Deliberately naive: long double, explicit loops, no shared helpers.
#pragma once

#include "chromafix/collinearity.hpp"
#include "chromafix/disparity.hpp"
#include "chromafix/image.hpp"
#include "chromafix/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Mat3 = std::array<std::array<long double, 3>, 3>;

// Cyclic Jacobi rotations; eigenvalues sorted descending.
inline std::array<long double, 3> jacobi_eigenvalues(Mat3 a)
{
    for (int sweep = 0; sweep < 100; ++sweep) {
        const long double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (off == 0.0L) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0L) continue;
                const long double theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
                const long double t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
                const long double c = 1.0L / std::sqrt(t * t + 1.0L);
                const long double s = t * c;
                Mat3 b = a;
                for (int k = 0; k < 3; ++k) {
                    b[k][p] = c * a[k][p] - s * a[k][q];
                    b[k][q] = s * a[k][p] + c * a[k][q];
                }
                Mat3 r = b;
                for (int k = 0; k < 3; ++k) {
                    r[p][k] = c * b[p][k] - s * b[q][k];
                    r[q][k] = s * b[p][k] + c * b[q][k];
                }
                r[p][q] = r[q][p] = 0.0L;
                a = r;
            }
        }
    }
    std::array<long double, 3> ev{a[0][0], a[1][1], a[2][2]};
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

inline Mat3 to_mat(const chromafix::Covariance3& c)
{
    Mat3 m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = c.at(i, j);
    return m;
}

// Textbook two-pass population covariance.
inline Mat3 covariance(const std::vector<chromafix::ColourSample>& s)
{
    const long double n = static_cast<long double>(s.size());
    std::array<long double, 3> mean{};
    for (const auto& v : s)
        for (int c = 0; c < 3; ++c) mean[c] += v[c];
    for (auto& m : mean) m /= n;
    Mat3 cov{};
    for (const auto& v : s)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cov[i][j] += (v[i] - mean[i]) * (v[j] - mean[j]);
    for (auto& row : cov)
        for (auto& x : row) x /= n;
    return cov;
}

// L from the Jacobi eigenvalues; nullopt when a channel is (numerically) constant.
inline std::optional<long double> l_value(const std::vector<chromafix::ColourSample>& s)
{
    const Mat3 cov = covariance(s);
    const long double denom = cov[0][0] * cov[1][1] * cov[2][2];
    if (denom < 1e-12L) return std::nullopt;
    auto ev = jacobi_eigenvalues(cov);
    for (auto& e : ev)
        if (e < 0 && e > -1e-12L) e = 0;
    return ev[0] * ev[1] * ev[2] / denom;
}

// Window samples read pixel by pixel; channel c displaced by shift[c].
inline std::vector<chromafix::ColourSample> gather(const chromafix::RgbImage& img, int x, int y, int r,
                                                   const std::array<chromafix::Offset, 3>& shift)
{
    std::vector<chromafix::ColourSample> out;
    for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
            out.push_back({img.red().at(x + i + shift[0].dx, y + j + shift[0].dy),
                           img.green().at(x + i + shift[1].dx, y + j + shift[1].dy),
                           img.blue().at(x + i + shift[2].dx, y + j + shift[2].dy)});
        }
    }
    return out;
}

struct ScanResult {
    bool found = false;
    chromafix::Offset first, second;
    double l = 0;
};

// Exhaustive 4D scan over both moving channels' disparities, scored with the
// library's l_value on naively gathered samples. Ties: smaller L, then smaller
// squared norm, then lexicographic (first.dx, first.dy, second.dx, second.dy).
inline ScanResult brute_force_scan(const chromafix::RgbImage& img, int x, int y, int window, int radius,
                                   chromafix::ChannelId reference)
{
    int moving[2];
    int k = 0;
    for (int c = 0; c < 3; ++c)
        if (c != static_cast<int>(reference)) moving[k++] = c;

    ScanResult best;
    long long best_norm = 0;
    std::array<int, 4> best_key{};
    for (int ax = -radius; ax <= radius; ++ax)
        for (int ay = -radius; ay <= radius; ++ay)
            for (int bx = -radius; bx <= radius; ++bx)
                for (int by = -radius; by <= radius; ++by) {
                    std::array<chromafix::Offset, 3> shift{};
                    shift[moving[0]] = {ax, ay};
                    shift[moving[1]] = {bx, by};
                    const auto samples = gather(img, x, y, window, shift);
                    const chromafix::LValue l = chromafix::l_value(samples);
                    if (!l.defined()) continue;
                    const long long norm = ax * ax + ay * ay + bx * bx + by * by;
                    const std::array<int, 4> key{ax, ay, bx, by};
                    bool take = !best.found;
                    if (!take) {
                        if (l.value() != best.l) {
                            take = l.value() < best.l;
                        } else if (norm != best_norm) {
                            take = norm < best_norm;
                        } else {
                            take = key < best_key;
                        }
                    }
                    if (take) {
                        best = {true, {ax, ay}, {bx, by}, l.value()};
                        best_norm = norm;
                        best_key = key;
                    }
                }
    return best;
}

// Centered closed-form least squares for mov = sigma * ref + t.
struct Fit {
    long double sigma = 1, tx = 0, ty = 0, rms = 0;
};

inline Fit least_squares(const std::vector<chromafix::PointPair>& pairs)
{
    const long double n = static_cast<long double>(pairs.size());
    long double px = 0, py = 0, qx = 0, qy = 0;
    for (const auto& p : pairs) {
        px += p.ref_x;
        py += p.ref_y;
        qx += p.mov_x;
        qy += p.mov_y;
    }
    px /= n;
    py /= n;
    qx /= n;
    qy /= n;
    long double num = 0, den = 0;
    for (const auto& p : pairs) {
        const long double dx = p.ref_x - px, dy = p.ref_y - py;
        num += dx * (p.mov_x - qx) + dy * (p.mov_y - qy);
        den += dx * dx + dy * dy;
    }
    Fit f;
    f.sigma = num / den;
    f.tx = qx - f.sigma * px;
    f.ty = qy - f.sigma * py;
    long double ss = 0;
    for (const auto& p : pairs) {
        const long double ex = f.sigma * p.ref_x + f.tx - p.mov_x;
        const long double ey = f.sigma * p.ref_y + f.ty - p.mov_y;
        ss += ex * ex + ey * ey;
    }
    f.rms = std::sqrt(ss / (2 * n));
    return f;
}

// Luminance gradient by direct per-pixel formula.
inline double gradient_at(const chromafix::RgbImage& img, int x, int y)
{
    auto lum = [&](int i, int j) {
        return 0.299 * img.red().at(i, j) + 0.587 * img.green().at(i, j) + 0.114 * img.blue().at(i, j);
    };
    const int w = img.width(), h = img.height();
    double gx = 0, gy = 0;
    if (w > 1) {
        if (x == 0) gx = lum(1, y) - lum(0, y);
        else if (x == w - 1) gx = lum(w - 1, y) - lum(w - 2, y);
        else gx = (lum(x + 1, y) - lum(x - 1, y)) / 2;
    }
    if (h > 1) {
        if (y == 0) gy = lum(x, 1) - lum(x, 0);
        else if (y == h - 1) gy = lum(x, h - 1) - lum(x, h - 2);
        else gy = (lum(x, y + 1) - lum(x, y - 1)) / 2;
    }
    return std::sqrt(gx * gx + gy * gy);
}

inline chromafix::RgbImage random_image(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    chromafix::ScalarField c[3] = {{w, h}, {w, h}, {w, h}};
    for (auto& f : c)
        for (auto& v : f.values()) v = u(rng);
    return chromafix::RgbImage(c[0], c[1], c[2]);
}

inline chromafix::RgbImage gray_image(const chromafix::ScalarField& f) { return chromafix::RgbImage(f, f, f); }

}  // namespace oracle
