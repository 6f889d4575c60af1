#include <gtest/gtest.h>

#include <cmath>

#include "ccqed/model_core.hpp"
#include "ccqed/schedule_design.hpp"

using namespace ccqed;

TEST(FractionToDetuning, Examples) {
    EXPECT_DOUBLE_EQ(fraction_to_detuning(0.0, 10.0), 0.0);
    EXPECT_NEAR(fraction_to_detuning(1.0 / 3.0, 10.0), 10.0, 1e-13);
    EXPECT_NEAR(fraction_to_detuning(100.0 / 102.0, 10.0), 100.0, 1e-11);
    EXPECT_THROW(fraction_to_detuning(1.0, 10.0), InvalidArgument);
    EXPECT_THROW(fraction_to_detuning(-0.1, 10.0), InvalidArgument);
}

TEST(FractionToDetuning, RoundTripThroughLdos) {
    for (double x = 0.0; x < 0.999; x += 0.0037) {
        const double d = fraction_to_detuning(x, 7.0);
        EXPECT_LT(std::abs(ldos_ratio(7.0, d) - x), 1e-12);
    }
    EXPECT_LT(std::abs(ldos_ratio(10.0, fraction_to_detuning(0.9804, 10.0)) - 0.9804), 1e-12);
}

TEST(EmissionModel, ReducesToBareCavityAtUnitFraction) {
    SystemParams p;
    const EmissionModel m(p);
    // x = 1: mode loss kappa_t / 2, emitter population decays at 4 g^2 / kappa_t
    EXPECT_NEAR(m.mode_loss(1.0), 0.5, 1e-15);
    EXPECT_NEAR(m.emitter_decay_rate(1.0), 4.0 * p.g * p.g / p.kappa_t, 1e-15);
    EXPECT_NEAR(m.extraction(1.0), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(m.emission_rate(0.0), 0.0);
    double prev = -1.0;
    for (double x = 0.0; x <= 1.0; x += 0.01) {
        EXPECT_GT(m.emission_rate(x), prev);
        prev = m.emission_rate(x);
    }
}

TEST(RequiredFraction, NearZeroEarlyAndBoundedEverywhere) {
    const SystemParams p;
    const GaussianTarget tgt{50.0, 25.0, 0.5};
    // far ahead of the pulse nothing needs to be emitted
    EXPECT_LT(required_fraction(GaussianTarget{200.0, 25.0, 0.5}, p, 0.0), 1e-3);
    const auto prof = required_fraction_profile(tgt, p, TimeGrid::spanning(0.0, 120.0, 1201));
    const double cap = ldos_ratio(p.eta, 10.0 * p.eta);
    for (double x : prof.fractions) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, cap);
        EXPECT_TRUE(std::isfinite(x));
    }
    for (std::size_t i = 1; i < prof.emitter_population.size(); ++i)
        EXPECT_LE(prof.emitter_population[i], prof.emitter_population[i - 1] + 1e-15);
}

TEST(RequiredFraction, FeasibilityBoundary) {
    const SystemParams p;
    GaussianTarget tgt{50.0, 25.0, 0.95};
    const auto grid = TimeGrid::spanning(0.0, 120.0, 1201);
    EXPECT_THROW(required_fraction_profile(tgt, p, grid), InfeasibleTarget);
    const double pmax = max_feasible_p_tot(tgt, p, grid);
    EXPECT_GT(pmax, 0.5);
    EXPECT_LT(pmax, 0.95);
    tgt.p_tot = pmax * (1.0 - 1e-9);
    const auto prof = required_fraction_profile(tgt, p, grid);
    const double xmax = *std::max_element(prof.fractions.begin(), prof.fractions.end());
    EXPECT_NEAR(xmax, ldos_ratio(p.eta, 10.0 * p.eta), 1e-6);  // rides the cap at the boundary
    tgt.p_tot = pmax * 1.01;
    EXPECT_THROW(required_fraction_profile(tgt, p, grid), InfeasibleTarget);
}

TEST(RequiredFraction, RejectsLossesOutsideBand) {
    SystemParams p;
    p.kappa_l = 1.5;
    EXPECT_THROW(required_fraction(GaussianTarget{50.0, 25.0, 0.3}, p, 10.0), InfeasibleTarget);
    p.kappa_l = 1.15;
    EXPECT_NO_THROW(required_fraction(GaussianTarget{50.0, 25.0, 0.3}, p, 10.0));
}

TEST(RequiredFraction, RejectsBadTargets) {
    const SystemParams p;
    EXPECT_THROW(required_fraction(GaussianTarget{50.0, 25.0, 1.0}, p, 1.0), InvalidArgument);
    EXPECT_THROW(required_fraction(GaussianTarget{50.0, 0.0, 0.5}, p, 1.0), InvalidArgument);
    EXPECT_THROW(required_fraction(GaussianTarget{50.0, 25.0, 0.5}, p, -1.0), InvalidArgument);
}

TEST(DesignSchedule, MonotoneUpToCenterAndDeterministic) {
    const SystemParams p;
    const GaussianTarget tgt;
    const auto a = design_symmetric_schedule(p, tgt, 120.0, 1201);
    const auto b = design_symmetric_schedule(p, tgt, 120.0, 1201);
    EXPECT_TRUE(a.scaled);  // 0.95 is out of reach for these parameters
    EXPECT_LT(a.p_tot, a.requested_p_tot);
    EXPECT_NEAR(a.p_tot, 0.95 * a.max_feasible_p_tot, 1e-15);
    const auto pa = a.schedule.samples(), pb = b.schedule.samples();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].delta, pb[i].delta);
    // starts low: the 2-sigma early tail still asks for some emission, so not at zero
    const double at_center = a.schedule(tgt.t0);
    EXPECT_LT(pa.front().delta, 0.3 * at_center);
    for (std::size_t i = 1; i < pa.size() && pa[i].t <= tgt.t0; ++i) EXPECT_GE(pa[i].delta, pa[i - 1].delta);
    for (const auto& s : pa) EXPECT_LE(s.delta, 10.0 * p.eta + 1e-12);
    EXPECT_EQ(a.schedule.kind(), ScheduleKind::designed);
}

TEST(DesignSchedule, ErrorPolicyPropagatesInfeasibility) {
    DesignOptions o;
    o.on_infeasible = InfeasiblePolicy::error;
    EXPECT_THROW(design_symmetric_schedule(SystemParams{}, GaussianTarget{}, 120.0, 601, o), InfeasibleTarget);
}

TEST(DesignSchedule, WideTargetGivesNearConstantSmallDetuning) {
    const SystemParams p;
    const GaussianTarget wide{50.0, 1e5, 0.001};
    const auto d = design_symmetric_schedule(p, wide, 100.0, 201);
    const auto pts = d.schedule.samples();
    EXPECT_FALSE(d.scaled);
    double lo = 1e300, hi = 0.0;
    for (const auto& s : pts) {
        lo = std::min(lo, s.delta);
        hi = std::max(hi, s.delta);
    }
    EXPECT_LT(hi, 0.2 * p.eta);
    EXPECT_LT(hi - lo, 0.01 * hi);
}

TEST(Adiabaticity, RampBetaFourPasses) {
    const SystemParams p;
    const auto r = check_adiabaticity(make_ramp(4.0), p, AdiabaticRegime::shaping);
    // chain 0.02 << 2 << 10, computed directly
    EXPECT_DOUBLE_EQ(r.lhs, 2.0 * 0.1 * 0.1 / 1.0);
    EXPECT_DOUBLE_EQ(r.mid, 2.0);
    EXPECT_DOUBLE_EQ(r.rhs, 10.0);
    EXPECT_DOUBLE_EQ(r.lower_margin, 2.0 / 0.02);
    EXPECT_DOUBLE_EQ(r.upper_margin, 5.0);
    EXPECT_TRUE(r.pass);
}

TEST(Adiabaticity, FastRampFails) {
    const SystemParams p;
    const double beta = (5.0 * p.eta) * (5.0 * p.eta);
    const auto r = check_adiabaticity(make_ramp(beta), p, AdiabaticRegime::shaping);
    EXPECT_NEAR(r.upper_margin, 0.2, 1e-15);
    EXPECT_FALSE(r.pass);
}

TEST(Adiabaticity, RabiRegimeNeedsStrongCoupling) {
    SystemParams p;
    const auto r = check_adiabaticity(make_ramp(4.0), p, AdiabaticRegime::rabi);
    EXPECT_FALSE(r.extra_rabi_check);
    EXPECT_FALSE(r.pass);
    p.g = 0.3;
    p.kappa_t = 0.1;
    const auto ok = check_adiabaticity(make_ramp(4.0), p, AdiabaticRegime::rabi);
    EXPECT_TRUE(ok.extra_rabi_check);
    EXPECT_DOUBLE_EQ(ok.lhs, 0.3);
}

TEST(Adiabaticity, SampledScheduleUsesCentralDifferences) {
    std::vector<SamplePoint> pts;
    for (int i = 0; i <= 10; ++i) pts.push_back({1.0 * i, 0.5 * i * i});
    // central differences of t^2/2 are exact: max slope at interior i=9 is 9; ends: one-sided 9.5
    EXPECT_DOUBLE_EQ(max_sweep_rate(make_sampled(pts)), 9.5);
    EXPECT_DOUBLE_EQ(max_sweep_rate(make_constant(100.0)), 0.0);
    EXPECT_DOUBLE_EQ(max_sweep_rate(make_ramp(-3.0)), 3.0);
}
