#include <map>

#include "slotcr/error.hpp"
#include "slotcr/oracles.hpp"

namespace slotcr {

Pmf edt_dp_oracle(int phi, const SlotChain& chain, int l_max, std::optional<SlotState> start) {
    if (phi < 1) throw Error(ErrorCode::InvalidCounts, "phi must be >= 1");
    if (l_max < phi) throw Error(ErrorCode::InvalidTruncation, "l_max must be >= phi");

    Vector3 init{};
    if (start) {
        init[index(*start)] = 1.0;
    } else {
        init = chain.stationary();
    }

    // alive[s][d]: probability that the current slot is in state d with s clean
    // slots so far (s < phi).
    const auto levels = static_cast<std::size_t>(phi);
    std::vector<Vector3> alive(levels, Vector3{});
    std::vector<double> probs(static_cast<std::size_t>(l_max), 0.0);

    for (SlotState d : kSlotStates) {
        const std::size_t s = d == SlotState::S ? 1 : 0;
        if (s == levels) {
            probs[0] += init[index(d)];
        } else {
            alive[s][index(d)] += init[index(d)];
        }
    }
    for (int l = 2; l <= l_max; ++l) {
        std::vector<Vector3> next(levels, Vector3{});
        for (std::size_t s = 0; s < levels; ++s) {
            for (SlotState from : kSlotStates) {
                const double mass = alive[s][index(from)];
                if (mass == 0.0) continue;
                for (SlotState to : kSlotStates) {
                    const double q = mass * chain.p(from, to);
                    if (q == 0.0) continue;
                    const std::size_t s2 = s + (to == SlotState::S ? 1 : 0);
                    if (s2 == levels) {
                        probs[static_cast<std::size_t>(l - 1)] += q;
                    } else {
                        next[s2][index(to)] += q;
                    }
                }
            }
        }
        alive = std::move(next);
    }
    double tail = 0.0;
    for (const auto& v : alive) {
        for (double m : v) tail += m;
    }
    return Pmf(1, std::move(probs), tail);
}

Pmf ttr_dp_oracle(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec, int phi_max) {
    pi.validate();
    spec.validate();
    if (pi.size() != scheme.rates().size()) {
        throw Error(ErrorCode::DimensionMismatch, "rate distribution and rate ladder differ in length");
    }
    if (phi_max < 1) throw Error(ErrorCode::InvalidTruncation, "phi_max must be >= 1");

    std::map<double, double> pending{{0.0, 1.0}}; // cumulative bits (< h_t) -> probability
    std::vector<double> probs(static_cast<std::size_t>(phi_max), 0.0);
    for (int phi = 1; phi <= phi_max; ++phi) {
        std::map<double, double> next;
        for (const auto& [bits, p] : pending) {
            for (std::size_t j = 0; j < pi.size(); ++j) {
                const double q = p * pi.pi[j];
                if (q == 0.0) continue;
                const double total = bits + spec.bits_per_slot(scheme.rates()[j]);
                if (total >= spec.h_t) {
                    probs[static_cast<std::size_t>(phi - 1)] += q;
                } else {
                    next[total] += q;
                }
            }
        }
        pending = std::move(next);
    }
    double tail = 0.0;
    for (const auto& [bits, p] : pending) tail += p;
    return Pmf(1, std::move(probs), tail);
}

} // namespace slotcr
