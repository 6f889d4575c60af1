#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ccqed/schedule.hpp"

using namespace ccqed;

TEST(Schedule, ZeroConstantRamp) {
    const auto z = make_zero();
    EXPECT_EQ(z.kind(), ScheduleKind::zero);
    EXPECT_EQ(z(-3.0), 0.0);
    EXPECT_EQ(z(1e6), 0.0);
    const auto c = make_constant(500.0);
    EXPECT_EQ(c(17.0), 500.0);
    EXPECT_EQ(c.max_abs(0.0, 100.0), 500.0);
    const auto r = make_ramp(4.0);
    EXPECT_DOUBLE_EQ(r(2.5), 10.0);
    EXPECT_DOUBLE_EQ(r.max_abs(0.0, 3.0), 12.0);
    EXPECT_THROW(make_constant(std::nan("")), InvalidArgument);
    EXPECT_THROW(make_ramp(INFINITY), InvalidArgument);
}

TEST(Schedule, SampledInterpolatesKnots) {
    // S-curve like a shaping schedule
    std::vector<SamplePoint> pts;
    for (int i = 0; i <= 20; ++i) {
        const double t = 6.0 * i;
        pts.push_back({t, 100.0 / (1.0 + std::exp(-(t - 60.0) / 8.0))});
    }
    const auto s = make_sampled(pts);
    EXPECT_EQ(s.kind(), ScheduleKind::sampled);
    for (const auto& p : pts) EXPECT_NEAR(s(p.t), p.delta, 1e-12);
    EXPECT_DOUBLE_EQ(s(-5.0), pts.front().delta);
    EXPECT_DOUBLE_EQ(s(500.0), pts.back().delta);
    EXPECT_DOUBLE_EQ(s.max_abs(0.0, 120.0), std::abs(pts.back().delta));
}

TEST(Schedule, SampledReproducesCubicExactly) {
    // Clamped spline with exact end slopes reproduces quadratics; the
    // three-point end slope is exact for quadratics too.
    std::vector<SamplePoint> pts;
    for (int i = 0; i <= 10; ++i) {
        const double t = 0.5 * i;
        pts.push_back({t, 2.0 + 3.0 * t - 0.7 * t * t});
    }
    const auto s = make_sampled(pts);
    for (double t = 0.0; t <= 5.0; t += 0.037) EXPECT_NEAR(s(t), 2.0 + 3.0 * t - 0.7 * t * t, 1e-10);
}

TEST(Schedule, TwoPointSplineIsLinear) {
    const std::vector<SamplePoint> pts{{0.0, 1.0}, {2.0, 5.0}};
    const auto s = make_sampled(pts);
    EXPECT_NEAR(s(0.5), 2.0, 1e-14);
    EXPECT_NEAR(s(1.5), 4.0, 1e-14);
}

TEST(Schedule, SamplesRoundTrip) {
    const std::vector<SamplePoint> pts{{0.0, 0.0}, {1.0, 2.0}, {3.0, 1.0}, {4.0, 7.0}};
    const auto s = make_sampled(pts, ScheduleKind::designed);
    EXPECT_EQ(s.kind(), ScheduleKind::designed);
    const auto back = s.samples();
    ASSERT_EQ(back.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(back[i].t, pts[i].t);
        EXPECT_EQ(back[i].delta, pts[i].delta);
    }
    const auto again = make_sampled(back);
    for (double t = 0.0; t <= 4.0; t += 0.1) EXPECT_EQ(again(t), s(t));
}

TEST(Schedule, RejectsBadSamples) {
    const std::vector<SamplePoint> dup{{0.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}};
    EXPECT_THROW(make_sampled(dup), InvalidArgument);
    const std::vector<SamplePoint> back{{0.0, 0.0}, {2.0, 1.0}, {1.0, 2.0}};
    EXPECT_THROW(make_sampled(back), InvalidArgument);
    const std::vector<SamplePoint> one{{0.0, 0.0}};
    EXPECT_THROW(make_sampled(one), InvalidArgument);
    const std::vector<SamplePoint> nan{{0.0, 0.0}, {1.0, std::nan("")}};
    EXPECT_THROW(make_sampled(nan), InvalidArgument);
    const std::vector<SamplePoint> ok{{0.0, 0.0}, {1.0, 1.0}};
    EXPECT_THROW(make_sampled(ok, ScheduleKind::constant), InvalidArgument);
}

TEST(Schedule, KindNames) {
    EXPECT_EQ(to_string(ScheduleKind::linear_ramp), "linear_ramp");
    EXPECT_EQ(to_string(ScheduleKind::designed), "designed");
}
