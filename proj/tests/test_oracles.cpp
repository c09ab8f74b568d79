#include <cmath>

#include <gtest/gtest.h>

#include "slotcr/oracles.hpp"
#include "slotcr/rng.hpp"
#include "test_util.hpp"

using namespace slotcr;

namespace {

SimConfig small_config(std::uint64_t slots = 200'000) {
    SimConfig c;
    c.n_slots = slots;
    c.burn_in = 1'000;
    return c;
}

} // namespace

TEST(Rng, ReproducibleAndStreamDependent) {
    CounterRng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    for (int k = 0; k < 100; ++k) {
        const auto x = a();
        EXPECT_EQ(x, b());
        EXPECT_NE(x, c());
        EXPECT_NE(x, d());
    }
}

TEST(Rng, UniformMoments) {
    CounterRng r(5);
    double s = 0.0, s2 = 0.0;
    const int n = 200'000;
    for (int k = 0; k < n; ++k) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    EXPECT_NEAR(s / n, 0.5, 0.005);
    EXPECT_NEAR(s2 / n, 1.0 / 3.0, 0.005);
}

TEST(Rng, ExponentialMean) {
    CounterRng r(9);
    double s = 0.0;
    const int n = 200'000;
    for (int k = 0; k < n; ++k) s += r.exponential(2.5);
    EXPECT_NEAR(s / n, 2.5, 0.05);
}

TEST(Simulator, SameSeedSameReport) {
    SimConfig c = small_config(50'000);
    c.n_edt_samples = 2'000;
    const SimReport a = simulate(c);
    const SimReport b = simulate(c);
    EXPECT_EQ(a.state_counts, b.state_counts);
    EXPECT_EQ(a.queue_hist, b.queue_hist);
    EXPECT_EQ(a.delay_samples, b.delay_samples);
    EXPECT_EQ(a.edt_samples, b.edt_samples);
    c.seed = 2;
    EXPECT_NE(simulate(c).state_counts, a.state_counts);
}

TEST(Simulator, PacketConservation) {
    for (double pa : {0.0, 0.2, 0.9}) {
        SimConfig c = small_config(100'000);
        c.scenario.arrivals = {pa};
        const SimReport r = simulate(c);
        EXPECT_EQ(r.arrivals, r.admitted + r.dropped);
        EXPECT_EQ(r.admitted, r.served + r.in_queue_at_end);
        EXPECT_LE(r.in_queue_at_end, static_cast<std::uint64_t>(c.scenario.queue.capacity));
        double hist = 0.0;
        for (double h : r.queue_hist) hist += h;
        EXPECT_NEAR(hist, 1.0, 1e-12);
        if (pa == 0.0) {
            EXPECT_EQ(r.arrivals, 0u);
            EXPECT_DOUBLE_EQ(r.queue_hist[0], 1.0);
        }
    }
}

TEST(Simulator, StateFrequenciesMatchChain) {
    const SimReport r = simulate(small_config(400'000));
    const SlotChain chain = build_slot_chain(PrimaryTrafficModel{0.030, 0.010}, SensingConfig{0.001});
    for (SlotState d : kSlotStates) {
        EXPECT_NEAR(r.state_freq[index(d)], chain.stationary()[index(d)], 0.01) << to_string(d);
        EXPECT_GT(r.state_ci95[index(d)], 0.0);
    }
}

TEST(Simulator, ExactCtmcModeAgreesForShortPeriods) {
    SimConfig c = small_config(400'000);
    c.mode = SimMode::ExactCtmc;
    c.scenario.sensing = {0.0005};
    const SimReport r = simulate(c);
    const SlotChain chain = build_slot_chain(c.scenario.primary, c.scenario.sensing);
    for (SlotState d : kSlotStates) EXPECT_NEAR(r.state_freq[index(d)], chain.stationary()[index(d)], 0.01);
}

TEST(Simulator, FixedRateEdtSamplesRespectSupport) {
    SimConfig c = small_config(0);
    c.n_edt_samples = 5'000;
    const SimReport r = simulate(c);
    ASSERT_EQ(r.edt_samples.size(), 5'000u);
    for (auto l : r.edt_samples) EXPECT_GE(l, 8u);
    const SlotChain chain = build_slot_chain(c.scenario.primary, c.scenario.sensing);
    const Pmf analytic = edt_pmf_fixed_auto(8, chain);
    EXPECT_NEAR(r.mean_edt, analytic.mean(), 4 * r.mean_edt_ci95);
}

TEST(Simulator, AdaptiveEdtSamples) {
    SimConfig c = small_config(0);
    c.n_edt_samples = 20'000;
    c.scenario.fixed_rate.reset();
    const SimReport r = simulate(c);
    const auto& sc = c.scenario;
    const RateDistribution pi = rate_probabilities(sc.scheme, sc.fading);
    const Pmf analytic = edt_pmf_adaptive(sc.scheme, pi, sc.packet, build_slot_chain(sc.primary, sc.sensing));
    EXPECT_NEAR(r.mean_edt, analytic.mean(), 4 * r.mean_edt_ci95);
}

TEST(Simulator, AlwaysIdleSingleRate) {
    SimConfig c = small_config(200'000);
    c.scenario.primary = {0.030, 1e9};
    c.scenario.scheme = AmScheme({0, 1}, {1e-300});
    c.scenario.arrivals = {0.5};
    c.scenario.queue = {200};
    const SimReport r = simulate(c);
    EXPECT_NEAR(r.throughput, 0.5, 0.01);
    EXPECT_EQ(r.dropped, 0u);
    EXPECT_NEAR(r.mean_delay, 1.0, 1e-3);
}

TEST(Simulator, ReplicationsIndependentOfWorkerCount) {
    SimConfig c = small_config(20'000);
    c.n_edt_samples = 500;
    const SimReport one = simulate_replications(c, 4, 1);
    const SimReport many = simulate_replications(c, 4, 4);
    EXPECT_EQ(one.state_counts, many.state_counts);
    EXPECT_EQ(one.delay_samples, many.delay_samples);
    EXPECT_EQ(one.edt_samples, many.edt_samples);
    EXPECT_EQ(one.slots, 80'000u);
}

TEST(Simulator, RejectsEmptyRun) {
    SimConfig c = small_config(0);
    EXPECT_ERROR_CODE(simulate(c), ErrorCode::InvalidConfig);
    c.n_slots = 10;
    c.scenario.arrivals = {2.0};
    EXPECT_ERROR_CODE(simulate(c), ErrorCode::InvalidConfig);
}

TEST(DpOracle, EdtHandValues) {
    const SlotChain c = build_slot_chain(0.4, 0.7);
    const Pmf p = edt_dp_oracle(1, c, 3, SlotState::W);
    EXPECT_DOUBLE_EQ(p.at(1), 0.0);
    EXPECT_NEAR(p.at(2), c.p_sw(), 1e-16);
    EXPECT_NEAR(p.at(3), c.p_ww() * c.p_sw(), 1e-16);
    EXPECT_NEAR(p.total() + p.tail_bound(), 1.0, 1e-15);
}

TEST(DpOracle, TransmissionHandValues) {
    const AmScheme scheme({0, 1, 2}, {1.0, 2.0});
    const Pmf p = ttr_dp_oracle(scheme, {{0.5, 0.25, 0.25}}, {200.0, 100.0}, 2);
    EXPECT_DOUBLE_EQ(p.at(1), 0.25);
    // second slot finishes from 0 bits with R2 or from 100 bits with R1 or R2
    EXPECT_DOUBLE_EQ(p.at(2), 0.25 * 0.5 + 0.5 * 0.25);
    EXPECT_DOUBLE_EQ(p.tail_bound(), 0.5 * 0.75 + 0.25 * 0.5);
}
