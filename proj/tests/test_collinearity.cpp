#include "chromafix/collinearity.hpp"
#include "chromafix/error.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace chromafix;

namespace {

double rel_err(long double a, long double b, long double scale)
{
    return static_cast<double>(std::fabs(a - b) / std::max(scale, 1e-300L));
}

// Random PSD matrix A A^T / k with a random rank 1..3.
Covariance3 random_psd(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0, 1);
    const int rank = 1 + static_cast<int>(rng() % 3);
    double a[3][3] = {};
    for (int k = 0; k < rank; ++k)
        for (int i = 0; i < 3; ++i) a[i][k] = n(rng);
    auto m = [&](int i, int j) { return a[i][0] * a[j][0] + a[i][1] * a[j][1] + a[i][2] * a[j][2]; };
    return {m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(0, 2), m(1, 2)};
}

}  // namespace

TEST_SUITE("collinearity")
{
    TEST_CASE("two perfectly correlated points")
    {
        const std::vector<ColourSample> s{{0, 0, 0}, {1, 1, 1}};
        const Covariance3 c = accumulate_covariance(s);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(c.at(i, j) == 0.25);
    }

    TEST_CASE("constant samples give a zero matrix and Undefined L")
    {
        const std::vector<ColourSample> s(20, ColourSample{0.3, 0.6, 0.1});
        const Covariance3 c = accumulate_covariance(s);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(c.at(i, j) == 0.0);
        CHECK_FALSE(l_value(s).defined());
    }

    TEST_CASE("fewer than two samples")
    {
        const std::vector<ColourSample> one{{0.1, 0.2, 0.3}};
        CHECK_THROWS_AS(accumulate_covariance(one), Error);
    }

    TEST_CASE("covariance matches the two-pass reference")
    {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<ColourSample> s(100);
        for (auto& v : s) v = {u(rng), u(rng), u(rng)};
        const Covariance3 c = accumulate_covariance(s);
        const oracle::Mat3 ref = oracle::covariance(s);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::fabs(c.at(i, j) - static_cast<double>(ref[i][j])) <= 1e-12);
    }

    TEST_CASE("eigenvalues of simple matrices")
    {
        const EigenTriple id = eigenvalues_sym3({1, 1, 1, 0, 0, 0});
        CHECK(id.l0 == doctest::Approx(1));
        CHECK(id.l1 == doctest::Approx(1));
        CHECK(id.l2 == doctest::Approx(1));
        const EigenTriple d = eigenvalues_sym3({4, 1, 0, 0, 0, 0});
        CHECK(d.l0 == doctest::Approx(4));
        CHECK(d.l1 == doctest::Approx(1));
        CHECK(d.l2 == 0.0);
    }

    TEST_CASE("eigenvalues match Jacobi on random PSD matrices")
    {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            const Covariance3 c = random_psd(rng);
            const EigenTriple e = eigenvalues_sym3(c);
            const auto ref = oracle::jacobi_eigenvalues(oracle::to_mat(c));
            const long double scale = ref[0];
            CHECK(rel_err(e.l0, ref[0], scale) <= 1e-9);
            CHECK(rel_err(e.l1, ref[1], scale) <= 1e-9);
            CHECK(rel_err(e.l2, ref[2], scale) <= 1e-9);
            CHECK(e.l0 >= e.l1);
            CHECK(e.l1 >= e.l2);
        }
    }

    TEST_CASE("grayscale samples are perfectly collinear")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<ColourSample> s(49);
        for (auto& v : s) {
            const double g = u(rng);
            v = {g, g, g};
        }
        const LValue l = l_value(s);
        REQUIRE(l.defined());
        CHECK(l.value() <= 1e-9);
        CHECK(l.value() >= 0.0);
    }

    TEST_CASE("isotropic cloud has L near 1")
    {
        std::mt19937_64 rng(12);
        std::normal_distribution<double> n(0.5, 0.1);
        std::vector<ColourSample> s(10000);
        for (auto& v : s) v = {n(rng), n(rng), n(rng)};
        const LValue l = l_value(s);
        REQUIRE(l.defined());
        CHECK(l.value() >= 0.9);
        CHECK(l.value() <= 1.1);
    }

    TEST_CASE("L agrees with the eigen-oracle value")
    {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0, 1);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<ColourSample> s(25);
            const double a = u(rng), b = u(rng);
            for (auto& v : s) {
                const double t = u(rng);
                v = {t, a * t + 0.3 * u(rng), b * t + 0.3 * u(rng)};
            }
            const auto ref = oracle::l_value(s);
            REQUIRE(ref.has_value());
            CHECK(l_value(s).value() == doctest::Approx(static_cast<double>(*ref)).epsilon(1e-9));
        }
    }

    TEST_CASE("zero disparities equal l_value of the window")
    {
        const RgbImage img = oracle::random_image(20, 20, 31);
        const auto samples = oracle::gather(img, 9, 10, 4, {});
        CHECK(l_at(img, 9, 10, 4, ChannelShifts{}) == l_value(samples));
        CHECK(l_at(img, 9, 10, 4, Offset{}, Offset{}) == l_value(samples));
    }

    TEST_CASE("shift cancellation")
    {
        // G(x,y) = R(x-2, y) and B(x,y) = R(x, y+1): reading G at +2 and B at -1 re-aligns them.
        const RgbImage base = oracle::random_image(30, 30, 6);
        ScalarField g(30, 30, 0.0), b(30, 30, 0.0);
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 30; ++x) {
                if (x >= 2) g.at(x, y) = base.red().at(x - 2, y);
                if (y + 1 < 30) b.at(x, y) = base.red().at(x, y + 1);
            }
        const RgbImage img(base.red(), g, b);
        const RgbImage aligned(base.red(), base.red(), base.red());
        const LValue expect = l_at(aligned, 14, 14, 5, ChannelShifts{});
        const LValue got = l_at(img, 14, 14, 5, Offset{2, 0}, Offset{0, -1});
        REQUIRE(got.defined());
        CHECK(got == expect);
        CHECK(got.value() <= 1e-9);
    }

    TEST_CASE("l_at matches a naive gather")
    {
        const RgbImage img = oracle::random_image(24, 24, 44);
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 40; ++trial) {
            ChannelShifts sh;
            for (auto& o : sh) o = {static_cast<int>(rng() % 5) - 2, static_cast<int>(rng() % 5) - 2};
            const int x = 6 + static_cast<int>(rng() % 12), y = 6 + static_cast<int>(rng() % 12);
            CHECK(l_at(img, x, y, 4, sh) == l_value(oracle::gather(img, x, y, 4, sh)));
        }
    }

    TEST_CASE("windows leaving the image are bounds errors")
    {
        const RgbImage img = oracle::random_image(10, 10, 1);
        try {
            l_at(img, 2, 5, 3, ChannelShifts{});
            FAIL("expected Bounds");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Bounds);
        }
        CHECK_THROWS_AS(l_at(img, 5, 5, 3, make_shifts(ChannelId::Green, Offset{3, 0}, Offset{})), Error);
    }

    TEST_CASE("make_shifts keeps the reference fixed")
    {
        const ChannelShifts s = make_shifts(ChannelId::Green, Offset{1, 2}, Offset{3, 4});
        CHECK(s[0] == Offset{1, 2});
        CHECK(s[1] == Offset{0, 0});
        CHECK(s[2] == Offset{3, 4});
        const ChannelShifts r = make_shifts(ChannelId::Red, Offset{1, 2}, Offset{3, 4});
        CHECK(r[0] == Offset{0, 0});
        CHECK(r[1] == Offset{1, 2});
        CHECK(r[2] == Offset{3, 4});
    }

    TEST_CASE("l_map of a grayscale image is zero")
    {
        const RgbImage gray = oracle::gray_image(oracle::random_image(25, 20, 3).red());
        const LMap m = l_map(gray, 3);
        int defined = 0;
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 25; ++x) {
                if (!m.defined.at(x, y)) continue;
                ++defined;
                CHECK(m.values.at(x, y) <= 1e-9);
            }
        CHECK(defined == (25 - 6) * (20 - 6));
    }

    TEST_CASE("l_map is l_at at zero disparity")
    {
        const RgbImage img = oracle::random_image(18, 15, 77);
        const LMap m = l_map(img, 2);
        for (int y = 0; y < 15; ++y)
            for (int x = 0; x < 18; ++x) {
                const bool inside = x >= 2 && y >= 2 && x < 16 && y < 13;
                CHECK((m.defined.at(x, y) != 0) == inside);
                if (inside) CHECK(m.values.at(x, y) == l_at(img, x, y, 2, ChannelShifts{}).value());
            }
        CHECK_THROWS_AS(l_map(img, 0), Error);
        CHECK_THROWS_AS(l_map(img, 8), Error);
    }

    TEST_CASE("render_lmap")
    {
        const RgbImage img = oracle::random_image(12, 12, 9);
        const LMap m = l_map(img, 2);
        const RgbImage plain = render_lmap(m);
        const RgbImage debug = render_lmap(m, true);
        CHECK(plain.red().at(0, 0) == 0.0);
        CHECK(debug.red().at(0, 0) == 1.0);
        CHECK(debug.green().at(0, 0) == 0.0);
        CHECK(debug.blue().at(0, 0) == 1.0);
        CHECK(plain.green().at(5, 5) == doctest::Approx(std::min(1.0, m.values.at(5, 5))));
    }
}
