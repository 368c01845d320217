#include "chromafix/error.hpp"
#include "chromafix/transform.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <random>

using namespace chromafix;

namespace {

DisparityMatch match_with(double post_l, int x = 0, int y = 0, Offset first = {}, Offset second = {})
{
    DisparityMatch m;
    m.keypoint.x = x;
    m.keypoint.y = y;
    m.first = first;
    m.second = second;
    m.post_l = post_l;
    return m;
}

ErrorKind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("transform")
{
    TEST_CASE("similarity algebra")
    {
        const SimilarityTransform t{1.02, 3.0, -1.5};
        const auto p = t.apply(10, 20);
        CHECK(p[0] == doctest::Approx(13.2));
        CHECK(p[1] == doctest::Approx(18.9));
        const auto back = t.inverse().apply(p[0], p[1]);
        CHECK(back[0] == doctest::Approx(10));
        CHECK(back[1] == doctest::Approx(20));
        const SimilarityTransform id = t.compose(t.inverse());
        CHECK(id.sigma == doctest::Approx(1));
        CHECK(id.tx == doctest::Approx(0));
        CHECK(id.ty == doctest::Approx(0));
        const auto m = t.matrix();
        CHECK(m[0][0] == 1.02);
        CHECK(m[0][2] == 3.0);
        CHECK(m[1][2] == -1.5);
        CHECK(m[2][2] == 1.0);
    }

    TEST_CASE("pruning")
    {
        const std::vector<DisparityMatch> bad{match_with(0.5), match_with(0.5), match_with(0.5)};
        CHECK(kind_of([&] { prune_matches(bad, 0.01); }) == ErrorKind::InsufficientMatches);

        const std::vector<DisparityMatch> mixed{match_with(0.001, 1), match_with(0.05, 2), match_with(0.009, 3)};
        const auto kept = prune_matches(mixed, 0.01);
        REQUIRE(kept.size() == 2);
        CHECK(kept[0].keypoint.x == 1);
        CHECK(kept[1].keypoint.x == 3);

        CHECK(prune_matches(mixed, 1.0) == mixed);
        const std::vector<DisparityMatch> edge{match_with(0.01, 1), match_with(0.0, 2)};
        CHECK(prune_matches(edge, 0.01).size() == 2);
    }

    TEST_CASE("exact two-point fits")
    {
        const std::vector<PointPair> scale{{0, 0, 0, 0}, {10, 10, 11, 11}};
        const FitReport a = fit_similarity(scale);
        CHECK(a.transform.sigma == doctest::Approx(1.1).epsilon(1e-12));
        CHECK(std::fabs(a.transform.tx) <= 1e-12);
        CHECK(std::fabs(a.transform.ty) <= 1e-12);
        CHECK(a.rms_residual <= 1e-9);
        CHECK(a.n_points == 2);

        const std::vector<PointPair> shift{{0, 0, 1, 2}, {10, 0, 11, 2}};
        const FitReport b = fit_similarity(shift);
        CHECK(b.transform.sigma == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.transform.tx == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.transform.ty == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(b.rms_residual <= 1e-9);
    }

    TEST_CASE("noisy fits match the centered least-squares solution")
    {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> pos(0, 512), sig(0.98, 1.02), tr(-5, 5);
        std::normal_distribution<double> noise(0, 0.1);
        for (int trial = 0; trial < 20; ++trial) {
            const SimilarityTransform truth{sig(rng), tr(rng), tr(rng)};
            std::vector<PointPair> pairs(50);
            for (auto& p : pairs) {
                p.ref_x = pos(rng);
                p.ref_y = pos(rng);
                const auto q = truth.apply(p.ref_x, p.ref_y);
                p.mov_x = q[0] + noise(rng);
                p.mov_y = q[1] + noise(rng);
            }
            const FitReport got = fit_similarity(pairs);
            const oracle::Fit ref = oracle::least_squares(pairs);
            CHECK(std::fabs(got.transform.sigma - static_cast<double>(ref.sigma)) <= 1e-9);
            CHECK(std::fabs(got.transform.tx - static_cast<double>(ref.tx)) <= 1e-9);
            CHECK(std::fabs(got.transform.ty - static_cast<double>(ref.ty)) <= 1e-9);
            CHECK(std::fabs(got.rms_residual - static_cast<double>(ref.rms)) <= 1e-9);
            CHECK_FALSE(got.condition_flag);
        }
    }

    TEST_CASE("degenerate geometry")
    {
        const std::vector<PointPair> one{{1, 1, 2, 2}};
        CHECK(kind_of([&] { fit_similarity(one); }) == ErrorKind::InsufficientData);
        const std::vector<PointPair> same{{5, 5, 6, 6}, {5, 5, 6, 7}, {5, 5, 6, 8}};
        CHECK(kind_of([&] { fit_similarity(same); }) == ErrorKind::DegenerateFit);
        const std::vector<PointPair> flip{{0, 0, 0, 0}, {10, 0, -10, 0}};
        CHECK(kind_of([&] { fit_similarity(flip); }) == ErrorKind::DegenerateFit);
        const std::vector<PointPair> close{{100, 100, 101, 100}, {100.5, 100.2, 101.5, 100.2}};
        CHECK(fit_similarity(close).condition_flag);
    }

    TEST_CASE("all-zero disparities fit the identity")
    {
        std::vector<DisparityMatch> ms;
        for (int i = 0; i < 6; ++i) ms.push_back(match_with(0.0, 20 + 37 * i, 300 - 41 * i));
        const auto fits = fit_channels(ms, ChannelId::Green);
        CHECK(fits[0].channel == ChannelId::Red);
        CHECK(fits[1].channel == ChannelId::Blue);
        for (const auto& f : fits) {
            CHECK(f.report.transform.sigma == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::fabs(f.report.transform.tx) <= 1e-9);
            CHECK(std::fabs(f.report.transform.ty) <= 1e-9);
            CHECK(f.report.n_points == 6);
        }
    }

    TEST_CASE("disparities generated by known transforms are recovered exactly")
    {
        // sigma = 1.01 turns positions on a 100-pixel lattice into integer displacements.
        const SimilarityTransform a{1.01, 2, -3}, b{0.99, -1, 4};
        std::vector<DisparityMatch> ms;
        for (int gy = 1; gy <= 4; ++gy)
            for (int gx = 1; gx <= 4; ++gx) {
                const int x = 100 * gx, y = 100 * gy;
                const auto pa = a.apply(x, y), pb = b.apply(x, y);
                ms.push_back(match_with(0.0, x, y, {static_cast<int>(std::lround(pa[0] - x)), static_cast<int>(std::lround(pa[1] - y))},
                                        {static_cast<int>(std::lround(pb[0] - x)), static_cast<int>(std::lround(pb[1] - y))}));
            }
        const auto fits = fit_channels(ms, ChannelId::Red);
        CHECK(fits[0].channel == ChannelId::Green);
        CHECK(fits[1].channel == ChannelId::Blue);
        const SimilarityTransform truth[2] = {a, b};
        for (int i = 0; i < 2; ++i) {
            const auto& t = fits[i].report.transform;
            CHECK(t.sigma == doctest::Approx(truth[i].sigma).epsilon(1e-12));
            CHECK(t.tx == doctest::Approx(truth[i].tx).epsilon(1e-9));
            CHECK(t.ty == doctest::Approx(truth[i].ty).epsilon(1e-9));
            CHECK(fits[i].report.rms_residual <= 1e-9);
        }

        const auto pairs = point_pairs(ms, true);
        REQUIRE(pairs.size() == ms.size());
        CHECK(pairs[0].ref_x == 100);
        CHECK(pairs[0].mov_x == 100 + ms[0].second.dx);
        CHECK(pairs[0].mov_y == 100 + ms[0].second.dy);
    }
}
