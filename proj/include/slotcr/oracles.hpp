#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "slotcr/edt.hpp"
#include "slotcr/modulation.hpp"
#include "slotcr/pmf.hpp"
#include "slotcr/primary_chain.hpp"
#include "slotcr/queueing.hpp"

namespace slotcr {

enum class SimMode {
    Discretized, ///< PU sensed state follows the two-state persistence chain exactly
    ExactCtmc,   ///< exponential busy/idle sojourns in continuous time, sensed at slot starts
};

/// Everything the simulator needs about one system.
struct SimScenario {
    PrimaryTrafficModel primary{0.030, 0.010};
    SensingConfig sensing{0.001};
    AmScheme scheme = rate_thresholds(1e-3, 3);
    FadingModel fading = FadingModel::rayleigh(100.0);
    ArrivalModel arrivals{0.2};
    QueueConfig queue{30};
    PacketSpec packet{8000.0, 500.0};
    /// Fixed rate (bits/symbol) for EDT samples; adaptive modulation when empty.
    std::optional<double> fixed_rate = 2.0;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::uint64_t n_slots = 1'000'000;     ///< measured queue slots after burn-in
    std::uint64_t burn_in = 10'000;
    std::uint64_t n_edt_samples = 0;
    SimMode mode = SimMode::Discretized;
    SimScenario scenario;

    void validate() const;
};

struct SimReport {
    std::uint64_t slots = 0; ///< measured slots
    std::array<std::uint64_t, 3> state_counts{};
    std::array<double, 3> state_freq{};
    std::array<double, 3> state_ci95{};
    std::vector<double> queue_hist; ///< queue length at slot start, measured slots

    // Whole-run packet bookkeeping: arrivals = admitted + dropped,
    // admitted = served + in_queue_at_end.
    std::uint64_t arrivals = 0;
    std::uint64_t admitted = 0;
    std::uint64_t dropped = 0;
    std::uint64_t served = 0;
    std::uint64_t in_queue_at_end = 0;

    double throughput = 0.0; ///< departures per measured slot
    double drop_rate = 0.0;  ///< dropped / arrivals over measured slots
    /// Slots from the arrival slot to the departure slot, for packets arriving
    /// after burn-in and served before the end of the run.
    std::vector<std::uint32_t> delay_samples;
    double mean_delay = 0.0;
    double mean_delay_ci95 = 0.0;

    std::vector<std::uint32_t> edt_samples;
    double mean_edt = 0.0;
    double mean_edt_ci95 = 0.0;

    double mean_queue() const;
};

SimReport simulate(const SimConfig& config);

/// Independent replications on streams config.stream, config.stream + 1, ...
/// run on up to `workers` threads and merged in stream order.
SimReport simulate_replications(const SimConfig& config, int replications, int workers = 1);

/// Exact EDT PMF by forward recursion over (slot, clean slots, state).
/// start = nullopt draws the first slot from the stationary law.
Pmf edt_dp_oracle(int phi, const SlotChain& chain, int l_max, std::optional<SlotState> start = std::nullopt);

/// Exact transmission-slot PMF by recursion over cumulative bits.
Pmf ttr_dp_oracle(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec, int phi_max);

} // namespace slotcr
