#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "slotcr/modulation.hpp"
#include "slotcr/pmf.hpp"
#include "slotcr/primary_chain.hpp"

namespace slotcr {

/// Large packet of h_t bits; a slot at rate R bits/symbol carries R * symbols_per_slot bits.
struct PacketSpec {
    double h_t = 0.0;
    double symbols_per_slot = 0.0;

    void validate() const;
    double bits_per_slot(double rate) const { return rate * symbols_per_slot; }
};

/// Region counts (n_0, ..., n_N) over the first phi - 1 transmission slots.
struct ChannelComposition {
    std::vector<int> counts;

    int slots() const;
};

inline constexpr double kDefaultTailTarget = 1e-8;
inline constexpr double kTruncationWarning = 1e-6;

/// ceil(h_t / (rate * nu)); throws Error(ZeroRate) for rate <= 0.
int slots_required(const PacketSpec& spec, double rate);

/**
 * Probability of one particular ordering class of waiting-phase decisions:
 * m+i-1 choose (i-1, j, m-j), times p_{S|W}^i p_{C|W}^j p_{W|W}^{m-j}.
 *
 * m counts the non-terminating decisions out of W (j of them W->C, m-j of them
 * W->W); i counts the W->S decisions, the last of which ends the sequence.
 */
double negative_multinomial_weight(int m, int i, int j, const SlotChain& chain);

/// Pr[T_ED = L | first slot in state start] for a packet needing phi clean slots.
double edt_conditional(SlotState start, int phi, const SlotChain& chain, int l);

/// EDT PMF on 1..l_max (support starts at phi) from the stationary first-slot law.
Pmf edt_pmf_fixed(int phi, const SlotChain& chain, int l_max);
/// Same, with an arbitrary first-slot distribution over (S, W, C).
Pmf edt_pmf_fixed(int phi, const SlotChain& chain, int l_max, const Vector3& initial);
/// Grows l_max until the exact tail falls below tail_target.
Pmf edt_pmf_fixed_auto(int phi, const SlotChain& chain, double tail_target = kDefaultTailTarget);

/// Exact Pr[T_ED > l] by forward propagation of the clean-slot count.
double edt_survival(int phi, const SlotChain& chain, int l, const Vector3& initial);

/// Dominant eigenvalue of the slot chain with clean slots removed; the EDT
/// tail decays like L^phi * rate^L.
double waiting_decay_rate(const SlotChain& chain);

/**
 * Visits every composition of `slots` over the regions of `bits_per_region`
 * whose cumulative bits stay strictly below bits_cap. Region 0 must carry zero
 * bits; it absorbs whatever slots remain. Branches are cut as soon as the
 * partial sum reaches bits_cap.
 */
void for_each_composition(std::span<const double> bits_per_region, int slots, double bits_cap,
                          const std::function<void(const ChannelComposition&, double bits)>& visit);

/// Pr[T_tr = phi] for phi = 1..phi_max; tail_bound = Pr[T_tr > phi_max] exactly.
Pmf ttr_pmf(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec, int phi_max);
/// Grows phi_max until the transmission-time tail falls below tail_target.
Pmf ttr_pmf_auto(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec,
                 double tail_target = kDefaultTailTarget);

/// Mixture of fixed-rate EDT PMFs over the transmission-slot count.
/// l_max = 0 selects the truncation automatically (tail below kDefaultTailTarget).
Pmf edt_pmf_adaptive(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec,
                     const SlotChain& chain, int l_max = 0);

} // namespace slotcr
