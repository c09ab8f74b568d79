#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "slotcr/edt.hpp"
#include "slotcr/oracles.hpp"
#include "test_util.hpp"

using namespace slotcr;

namespace {

Vector3 unit(SlotState s) {
    Vector3 v{};
    v[index(s)] = 1.0;
    return v;
}

/// Sums the probabilities of every decision string out of W with the given
/// letter counts, found by walking all 3^len strings.
double brute_force_weight(int m, int i, int j, const SlotChain& c) {
    const int len = m + i - 1;
    long strings = 1;
    for (int k = 0; k < len; ++k) strings *= 3;
    double total = 0.0;
    for (long code = 0; code < strings; ++code) {
        int s = 0, cw = 0, ww = 0;
        long x = code;
        for (int k = 0; k < len; ++k, x /= 3) {
            const int letter = static_cast<int>(x % 3);
            s += letter == 0;
            cw += letter == 1;
            ww += letter == 2;
        }
        if (s == i - 1 && cw == j && ww == m - j) {
            total += std::pow(c.p_sw(), i) * std::pow(c.p_cw(), j) * std::pow(c.p_ww(), m - j);
        }
    }
    return total;
}

/// EDT with adaptive rates by forward recursion over (cumulative bits, slot state).
std::vector<double> adaptive_dp(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec,
                                const SlotChain& chain, int l_max) {
    std::map<std::pair<double, int>, double> alive;
    std::vector<double> out(static_cast<std::size_t>(l_max) + 1, 0.0);
    auto enter = [&](std::map<std::pair<double, int>, double>& into, double bits, SlotState d, double mass, int l) {
        if (d != SlotState::S) {
            into[{bits, static_cast<int>(index(d))}] += mass;
            return;
        }
        for (std::size_t j = 0; j < pi.size(); ++j) {
            const double b = bits + spec.bits_per_slot(scheme.rates()[j]);
            if (b >= spec.h_t) out[static_cast<std::size_t>(l)] += mass * pi.pi[j];
            else into[{b, static_cast<int>(index(d))}] += mass * pi.pi[j];
        }
    };
    for (SlotState d : kSlotStates) enter(alive, 0.0, d, chain.stationary()[index(d)], 1);
    for (int l = 2; l <= l_max; ++l) {
        std::map<std::pair<double, int>, double> next;
        for (const auto& [key, mass] : alive) {
            for (SlotState to : kSlotStates) {
                const double p = chain.p(kSlotStates[static_cast<std::size_t>(key.second)], to);
                if (p > 0.0) enter(next, key.first, to, mass * p, l);
            }
        }
        alive = std::move(next);
    }
    return out;
}

} // namespace

TEST(Edt, SlotsRequired) {
    EXPECT_EQ(slots_required({8000, 500}, 2.0), 8);
    EXPECT_EQ(slots_required({8001, 500}, 2.0), 9);
    EXPECT_EQ(slots_required({4000, 500}, 2.0), 4);
    EXPECT_EQ(slots_required({1000, 500}, 1.5), 2);
    EXPECT_EQ(slots_required({1, 500}, 6.0), 1);
    EXPECT_ERROR_CODE(slots_required({8000, 500}, 0.0), ErrorCode::ZeroRate);
    EXPECT_ERROR_CODE(slots_required({0, 500}, 2.0), ErrorCode::InvalidParameter);
}

TEST(Edt, NegativeMultinomialWeightMatchesBruteForce) {
    const SlotChain c = build_slot_chain(0.6, 0.3);
    for (int i = 1; i <= 3; ++i) {
        for (int m = 0; m <= 5; ++m) {
            for (int j = 0; j <= m; ++j) {
                EXPECT_NEAR(negative_multinomial_weight(m, i, j, c), brute_force_weight(m, i, j, c), 1e-15)
                    << "m=" << m << " i=" << i << " j=" << j;
            }
        }
    }
}

TEST(Edt, NegativeMultinomialWeightLargeCounts) {
    const SlotChain c = build_slot_chain(0.95, 0.9);
    // Beyond the exact-integer range the weight comes from log factorials.
    for (auto [m, i, j] : {std::tuple{40, 5, 10}, std::tuple{200, 8, 60}, std::tuple{600, 3, 100}}) {
        const double lg = std::lgamma(m + i) - std::lgamma(i) - std::lgamma(j + 1) - std::lgamma(m - j + 1) +
                          i * std::log(c.p_sw()) + j * std::log(c.p_cw()) + (m - j) * std::log(c.p_ww());
        EXPECT_NEAR(negative_multinomial_weight(m, i, j, c) / std::exp(lg), 1.0, 1e-10);
    }
}

TEST(Edt, NegativeMultinomialWeightRejectsBadCounts) {
    const SlotChain c = build_slot_chain(0.6, 0.3);
    EXPECT_ERROR_CODE(negative_multinomial_weight(2, 0, 1, c), ErrorCode::InvalidCounts);
    EXPECT_ERROR_CODE(negative_multinomial_weight(2, 1, 3, c), ErrorCode::InvalidCounts);
    EXPECT_ERROR_CODE(negative_multinomial_weight(2, 1, -1, c), ErrorCode::InvalidCounts);
}

TEST(Edt, SingleCleanSlotFromS) {
    const SlotChain c = build_slot_chain(0.5, 0.5);
    EXPECT_DOUBLE_EQ(edt_conditional(SlotState::S, 1, c, 1), 1.0);
    EXPECT_DOUBLE_EQ(edt_conditional(SlotState::S, 1, c, 2), 0.0);
}

TEST(Edt, ShortestPathsFromEachStart) {
    const SlotChain c = build_slot_chain(0.4, 0.7);
    // W then S: one waiting slot
    EXPECT_NEAR(edt_conditional(SlotState::W, 1, c, 2), c.p_sw(), 1e-16);
    // C then W then S
    EXPECT_NEAR(edt_conditional(SlotState::C, 1, c, 3), c.p_sw(), 1e-16);
    // S S S
    EXPECT_NEAR(edt_conditional(SlotState::S, 3, c, 3), c.p_ss() * c.p_ss(), 1e-16);
    // S C W S: one collision detour
    EXPECT_NEAR(edt_conditional(SlotState::S, 2, c, 4), c.p_cs() * c.p_sw(), 1e-16);
    EXPECT_EQ(edt_conditional(SlotState::W, 2, c, 2), 0.0);
}

TEST(Edt, ConditionalLawsMatchDp) {
    for (double bon : {0.1, 0.5, 0.9}) {
        for (double boff : {0.1, 0.5, 0.9}) {
            const SlotChain c = build_slot_chain(bon, boff);
            for (int phi = 1; phi <= 8; ++phi) {
                for (SlotState s : kSlotStates) {
                    const Pmf closed = edt_pmf_fixed(phi, c, 60, unit(s));
                    const Pmf dp = edt_dp_oracle(phi, c, 60, s);
                    EXPECT_LT(max_abs_difference(closed, dp), 1e-12)
                        << "beta=(" << bon << "," << boff << ") phi=" << phi << " start " << to_string(s);
                    EXPECT_NEAR(closed.tail_bound(), dp.tail_bound(), 1e-12);
                }
            }
        }
    }
}

TEST(Edt, CompletenessAndSurvival) {
    const SlotChain c = build_slot_chain(PrimaryTrafficModel{0.030, 0.010}, SensingConfig{0.001});
    const Pmf p = edt_pmf_fixed(8, c, 300);
    EXPECT_NEAR(p.total() + p.tail_bound(), 1.0, 1e-12);
    double below = 0.0;
    for (int l = 8; l <= 120; ++l) {
        below += p.at(static_cast<std::size_t>(l));
        EXPECT_NEAR(edt_survival(8, c, l, c.stationary()), 1.0 - below, 1e-12);
    }
}

TEST(Edt, AutomaticTruncationMeetsTarget) {
    const SlotChain c = build_slot_chain(PrimaryTrafficModel{0.030, 0.010}, SensingConfig{0.001});
    const Pmf p = edt_pmf_fixed_auto(8, c);
    EXPECT_LT(p.tail_bound(), kDefaultTailTarget);
    EXPECT_NEAR(p.total() + p.tail_bound(), 1.0, 1e-12);
    EXPECT_EQ(p.first(), 8u);
}

TEST(Edt, DecayRateIsWaitingEigenvalue) {
    for (double bon : {0.2, 0.7, 0.97}) {
        for (double boff : {0.1, 0.6, 0.9}) {
            const SlotChain c = build_slot_chain(bon, boff);
            Eigen::Matrix2d q;
            q << c.p_ww(), c.p_cw(), 1.0, 0.0;
            const double oracle = q.eigenvalues().cwiseAbs().maxCoeff();
            EXPECT_NEAR(waiting_decay_rate(c), oracle, 1e-14);
        }
    }
}

TEST(Edt, TailDecaysAtWaitingRate) {
    const SlotChain c = build_slot_chain(0.9, 0.9);
    const Pmf p = edt_pmf_fixed(2, c, 2000);
    const double ratio = p.at(1500) / p.at(1499);
    // L^phi prefactor perturbs the ratio by about phi / L
    EXPECT_NEAR(ratio, waiting_decay_rate(c), 2e-3);
}

TEST(Edt, RejectsBadTruncation) {
    const SlotChain c = build_slot_chain(0.5, 0.5);
    EXPECT_ERROR_CODE(edt_pmf_fixed(5, c, 4), ErrorCode::InvalidTruncation);
    EXPECT_ERROR_CODE(edt_pmf_fixed(0, c, 4), ErrorCode::InvalidCounts);
    EXPECT_ERROR_CODE(edt_dp_oracle(5, c, 4), ErrorCode::InvalidTruncation);
    EXPECT_ERROR_CODE(edt_pmf_fixed(2, c, 10, Vector3{0.5, 0.6, 0.0}), ErrorCode::InvalidProbability);
}

TEST(Edt, CompositionEnumeration) {
    const std::vector<double> bits{0.0, 1.0, 2.0};
    int visits = 0;
    for_each_composition(bits, 4, 1e9, [&](const ChannelComposition& c, double sent) {
        ++visits;
        EXPECT_EQ(c.slots(), 4);
        EXPECT_DOUBLE_EQ(sent, c.counts[1] + 2.0 * c.counts[2]);
    });
    EXPECT_EQ(visits, 15); // C(4 + 2, 2)

    int pruned = 0;
    for_each_composition(bits, 4, 3.0, [&](const ChannelComposition&, double sent) {
        ++pruned;
        EXPECT_LT(sent, 3.0);
    });
    // (n1, n2) with n1 + 2 n2 < 3: (0,0), (1,0), (2,0), (0,1)
    EXPECT_EQ(pruned, 4);
    EXPECT_ERROR_CODE(for_each_composition(std::vector<double>{1.0, 2.0}, 2, 3.0, [](auto&, double) {}),
                      ErrorCode::InvalidParameter);
}

TEST(Edt, TransmissionTimeMatchesDp) {
    const std::vector<std::vector<double>> laws{
        {0.5, 0.5}, {0.2, 0.3, 0.5}, {0.1, 0.2, 0.3, 0.4}, {0.05, 0.15, 0.2, 0.25, 0.35}, {0.0, 0.1, 0.0, 0.9}};
    for (const auto& law : laws) {
        const int n = static_cast<int>(law.size()) - 1;
        std::vector<double> rates(law.size()), thresholds;
        std::iota(rates.begin(), rates.end(), 0.0);
        for (int j = 1; j <= n; ++j) thresholds.push_back(j);
        const AmScheme scheme(rates, thresholds);
        for (int ratio = 1; ratio <= 12; ++ratio) {
            const PacketSpec spec{ratio * n * 100.0 - 50.0 * (ratio % 2), 100.0};
            const Pmf a = ttr_pmf(scheme, {law}, spec, 30);
            const Pmf b = ttr_dp_oracle(scheme, {law}, spec, 30);
            EXPECT_LT(max_abs_difference(a, b), 1e-12) << "N=" << n << " ratio " << ratio;
            EXPECT_NEAR(a.tail_bound(), b.tail_bound(), 1e-12);
            EXPECT_NEAR(a.total() + a.tail_bound(), 1.0, 1e-12);
        }
    }
}

TEST(Edt, TransmissionTimeGeometricCase) {
    const AmScheme scheme({0, 1}, {1.0});
    const PacketSpec spec{100.0, 100.0};
    const Pmf p = ttr_pmf(scheme, {{0.5, 0.5}}, spec, 40);
    for (int phi = 1; phi <= 40; ++phi) EXPECT_EQ(p.at(static_cast<std::size_t>(phi)), std::ldexp(1.0, -phi));
    EXPECT_EQ(p.tail_bound(), std::ldexp(1.0, -40));
}

TEST(Edt, AdaptiveReducesToFixedForSingleRate) {
    const SlotChain c = build_slot_chain(PrimaryTrafficModel{0.030, 0.010}, SensingConfig{0.001});
    const AmScheme scheme({0, 2}, {1.0});
    const PacketSpec spec{8000.0, 500.0};
    const Pmf adaptive = edt_pmf_adaptive(scheme, {{0.0, 1.0}}, spec, c, 200);
    const Pmf fixed = edt_pmf_fixed(8, c, 200);
    EXPECT_LT(max_abs_difference(adaptive, fixed), 1e-15);
    EXPECT_NEAR(adaptive.tail_bound(), fixed.tail_bound(), 1e-15);
}

TEST(Edt, AdaptiveMatchesJointDp) {
    const SlotChain c = build_slot_chain(0.7, 0.6);
    const AmScheme scheme({0, 1, 2, 3}, {1.0, 2.0, 3.0});
    const RateDistribution pi{{0.2, 0.3, 0.3, 0.2}};
    const PacketSpec spec{700.0, 100.0};
    const int l_max = 50;
    const Pmf closed = edt_pmf_adaptive(scheme, pi, spec, c, l_max);
    const auto dp = adaptive_dp(scheme, pi, spec, c, l_max);
    double dp_total = 0.0;
    for (int l = 1; l <= l_max; ++l) {
        EXPECT_NEAR(closed.at(static_cast<std::size_t>(l)), dp[static_cast<std::size_t>(l)], 1e-12) << "L=" << l;
        dp_total += dp[static_cast<std::size_t>(l)];
    }
    // The closed form also loses the transmission-time truncation mass, bounded by its target.
    EXPECT_NEAR(closed.tail_bound(), 1.0 - dp_total, 2 * kDefaultTailTarget);
    EXPECT_NEAR(closed.total() + closed.tail_bound(), 1.0, 1e-9);
}

TEST(Edt, AdaptiveAutomaticTruncation) {
    const SlotChain c = build_slot_chain(PrimaryTrafficModel{0.030, 0.010}, SensingConfig{0.001});
    const AmScheme scheme = rate_thresholds(1e-3, 3);
    const RateDistribution pi = rate_probabilities(scheme, FadingModel::rayleigh(100.0));
    const Pmf p = edt_pmf_adaptive(scheme, pi, {8000.0, 500.0}, c);
    EXPECT_LT(p.tail_bound(), 2 * kDefaultTailTarget);
    EXPECT_NEAR(p.total() + p.tail_bound(), 1.0, 1e-9);
    EXPECT_EQ(p.first(), 6u); // ceil(8000 / 1500)
}

TEST(Edt, AdaptiveRejectsDeadLink) {
    const SlotChain c = build_slot_chain(0.5, 0.5);
    EXPECT_ERROR_CODE(edt_pmf_adaptive(AmScheme({0, 1}, {1.0}), {{1.0, 0.0}}, {100.0, 100.0}, c),
                      ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(edt_pmf_adaptive(AmScheme({0, 1}, {1.0}), {{0.5, 0.25, 0.25}}, {100.0, 100.0}, c),
                      ErrorCode::DimensionMismatch);
}
