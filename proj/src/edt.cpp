#include "slotcr/edt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "slotcr/error.hpp"

namespace slotcr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Terms this far (natural log) below the running maximum are negligible at double precision.
constexpr double kLogCutoff = 80.0;
constexpr int kMaxAutoSlots = 10'000'000;

double log_pow(double p, long k) {
    if (k == 0) return 0.0;
    if (p <= 0.0) return kNegInf;
    return static_cast<double>(k) * std::log(p);
}

class LogFactorials {
  public:
    double operator()(int n) {
        if (n < 0) return kNegInf;
        while (static_cast<int>(table_.size()) <= n) {
            table_.push_back(std::lgamma(static_cast<double>(table_.size()) + 1.0));
        }
        return table_[static_cast<std::size_t>(n)];
    }

  private:
    std::vector<double> table_;
};

/// Exact multinomial coefficient when it fits in 64 bits.
std::optional<double> exact_multinomial(std::span<const int> parts) {
    using u128 = unsigned __int128;
    constexpr u128 kMax = std::numeric_limits<std::uint64_t>::max();
    u128 acc = 1;
    std::uint64_t base = 0;
    for (int part : parts) {
        u128 binom = 1;
        for (int t = 1; t <= part; ++t) {
            binom = binom * (base + static_cast<std::uint64_t>(t)) / static_cast<std::uint64_t>(t);
            if (binom > kMax) return std::nullopt;
        }
        base += static_cast<std::uint64_t>(part);
        acc *= binom;
        if (acc > kMax) return std::nullopt;
    }
    return static_cast<double>(static_cast<std::uint64_t>(acc));
}

double log_multinomial(std::span<const int> parts, LogFactorials& lf) {
    int total = 0;
    double out = 0.0;
    for (int p : parts) {
        total += p;
        out -= lf(p);
    }
    return out + lf(total);
}

/// multinomial(parts) * prod probs[k]^parts[k]
double multinomial_probability(std::span<const int> parts, std::span<const double> probs, LogFactorials& lf) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k] > 0 && probs[k] <= 0.0) return 0.0;
    }
    if (const auto coef = exact_multinomial(parts)) {
        double out = *coef;
        for (std::size_t k = 0; k < parts.size(); ++k) out *= std::pow(probs[k], parts[k]);
        if (out > 0.0 && std::isfinite(out)) return out;
    }
    double lg = log_multinomial(parts, lf);
    for (std::size_t k = 0; k < parts.size(); ++k) lg += log_pow(probs[k], parts[k]);
    return std::exp(lg);
}

/**
 * Closed-form EDT series for one slot chain.
 *
 * waiting(i, r) is the probability that i waiting phases (each ending with a
 * W->S decision) contain w W->W and j W->C decisions with w + 2j = r, i.e. the
 * inner negative-multinomial sum. Values are cached per i because the adaptive
 * mixture reuses them for every transmission-slot count.
 */
class EdtSeries {
  public:
    explicit EdtSeries(const SlotChain& chain)
        : p_ss_(chain.p_ss()), p_cs_(chain.p_cs()), log_sw_(std::log(chain.p_sw())),
          log_cw_(std::log(chain.p_cw())), log_ww_(std::log(chain.p_ww())), p_sw_(chain.p_sw()),
          p_cw_(chain.p_cw()), p_ww_(chain.p_ww()) {}

    double waiting(int i, int r) {
        if (r < 0 || i < 1) return 0.0;
        if (static_cast<int>(table_.size()) <= i) table_.resize(static_cast<std::size_t>(i) + 1);
        auto& row = table_[static_cast<std::size_t>(i)];
        while (static_cast<int>(row.size()) <= r) row.push_back(compute_waiting(i, static_cast<int>(row.size())));
        return row[static_cast<std::size_t>(r)];
    }

    double conditional(SlotState start, int phi, int l) {
        if (phi < 1) throw Error(ErrorCode::InvalidCounts, "phi must be >= 1");
        if (l < phi) return 0.0;
        double total = 0.0;
        if (start == SlotState::S) {
            if (l == phi) total += std::pow(p_ss_, phi - 1);
            for (int i = 1; i <= phi - 1; ++i) {
                const int r = l - phi - 2 * i;
                if (r < 0) break;
                total += waiting(i, r) * transmit_factor(phi - 1, i);
            }
            return total;
        }
        const int offset = start == SlotState::W ? 1 : 2;
        for (int i = 1; i <= phi; ++i) {
            const int r = l - offset - phi - 2 * (i - 1);
            if (r < 0) break;
            total += waiting(i, r) * transmit_factor(phi - 1, i - 1);
        }
        return total;
    }

  private:
    // binom(decisions, collisions) p_ss^(decisions - collisions) p_cs^collisions
    double transmit_factor(int decisions, int collisions) {
        const double lg = lf_(decisions) - lf_(collisions) - lf_(decisions - collisions) +
                          log_pow(p_ss_, decisions - collisions) + log_pow(p_cs_, collisions);
        return std::exp(lg);
    }

    double compute_waiting(int i, int r) {
        const double log_exit = p_sw_ > 0.0 ? i * log_sw_ : kNegInf;
        if (log_exit == kNegInf) return 0.0;
        double best = kNegInf;
        double sum = 0.0;
        for (int j = 0; 2 * j <= r; ++j) {
            const int w = r - 2 * j;
            if (j > 0 && p_cw_ <= 0.0) break;
            if (w > 0 && p_ww_ <= 0.0) continue;
            const double lt = lf_(w + j + i - 1) - lf_(i - 1) - lf_(j) - lf_(w) + log_exit +
                              (j > 0 ? j * log_cw_ : 0.0) + (w > 0 ? w * log_ww_ : 0.0);
            if (lt < best - kLogCutoff) continue;
            best = std::max(best, lt);
            sum += std::exp(lt);
        }
        return sum;
    }

    double p_ss_, p_cs_;
    double log_sw_, log_cw_, log_ww_;
    double p_sw_, p_cw_, p_ww_;
    LogFactorials lf_;
    std::vector<std::vector<double>> table_;
};

/// Forward law of (clean slots so far, current state), truncated at `limit` clean slots.
class CleanCountPropagator {
  public:
    CleanCountPropagator(const SlotChain& chain, const Vector3& initial, int limit)
        : chain_(chain), limit_(limit), mass_(static_cast<std::size_t>(limit), Vector3{}) {
        const auto S = index(SlotState::S);
        if (limit_ > 1) mass_[1][S] = initial[S];
        mass_[0][index(SlotState::W)] = initial[index(SlotState::W)];
        mass_[0][index(SlotState::C)] = initial[index(SlotState::C)];
        slots_ = 1;
    }

    int slots() const noexcept { return slots_; }

    void step() {
        std::vector<Vector3> next(mass_.size(), Vector3{});
        for (std::size_t s = 0; s < mass_.size(); ++s) {
            for (SlotState from : kSlotStates) {
                const double m = mass_[s][index(from)];
                if (m == 0.0) continue;
                for (SlotState to : kSlotStates) {
                    const double p = chain_.p(from, to);
                    if (p == 0.0) continue;
                    const std::size_t s2 = s + (to == SlotState::S ? 1 : 0);
                    if (s2 < next.size()) next[s2][index(to)] += m * p;
                }
            }
        }
        mass_ = std::move(next);
        ++slots_;
    }

    /// Pr[fewer than phi clean slots so far], phi <= limit.
    double below(int phi) const {
        double total = 0.0;
        for (int s = 0; s < std::min(phi, limit_); ++s) {
            for (double m : mass_[static_cast<std::size_t>(s)]) total += m;
        }
        return total;
    }

  private:
    const SlotChain& chain_;
    int limit_;
    std::vector<Vector3> mass_;
    int slots_ = 0;
};

void require_distribution(const Vector3& initial) {
    double total = 0.0;
    for (double p : initial) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidProbability, "initial law outside [0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidProbability, "initial law must sum to 1");
}

int initial_truncation_guess(int phi, const SlotChain& chain, double tail_target) {
    const double rho = waiting_decay_rate(chain);
    if (rho <= 0.0) return phi + 2;
    if (rho >= 1.0) return phi + 1024;
    return phi + static_cast<int>(std::ceil(std::log(tail_target) / std::log(rho)));
}

/// Smallest l from `guess` upward (growing by half) with tail(l) < target.
template <typename TailAt>
int grow_truncation(int guess, double target, TailAt&& tail_at) {
    int l = std::max(guess, 1);
    while (tail_at(l) >= target) {
        if (l >= kMaxAutoSlots) {
            throw Error(ErrorCode::InvalidTruncation, "EDT tail does not decay; the chain never reaches S");
        }
        l = std::min(kMaxAutoSlots, l + l / 2 + 1);
    }
    return l;
}

void validate_ttr_inputs(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec) {
    pi.validate();
    spec.validate();
    if (pi.size() != scheme.rates().size()) {
        throw Error(ErrorCode::DimensionMismatch, "rate distribution and rate ladder differ in length");
    }
    bool can_finish = false;
    for (std::size_t j = 0; j < pi.size(); ++j) can_finish |= pi.pi[j] > 0.0 && scheme.rates()[j] > 0.0;
    if (!can_finish) throw Error(ErrorCode::InvalidParameter, "no positive-rate mass: transmission never completes");
}

} // namespace

void PacketSpec::validate() const {
    if (!std::isfinite(h_t) || h_t <= 0.0) throw Error(ErrorCode::InvalidParameter, "packet size must be positive");
    if (!std::isfinite(symbols_per_slot) || symbols_per_slot <= 0.0) {
        throw Error(ErrorCode::InvalidParameter, "symbols per slot must be positive");
    }
}

int ChannelComposition::slots() const {
    int total = 0;
    for (int c : counts) total += c;
    return total;
}

int slots_required(const PacketSpec& spec, double rate) {
    spec.validate();
    if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorCode::ZeroRate, "rate must be positive");
    const double bits = spec.bits_per_slot(rate);
    constexpr double kExact = 9007199254740992.0; // 2^53
    if (spec.h_t == std::floor(spec.h_t) && bits == std::floor(bits) && spec.h_t < kExact && bits < kExact) {
        const auto h = static_cast<std::uint64_t>(spec.h_t);
        const auto b = static_cast<std::uint64_t>(bits);
        return static_cast<int>(std::max<std::uint64_t>(1, (h + b - 1) / b));
    }
    return std::max(1, static_cast<int>(std::ceil(spec.h_t / bits)));
}

double negative_multinomial_weight(int m, int i, int j, const SlotChain& chain) {
    if (i < 1 || j < 0 || j > m) throw Error(ErrorCode::InvalidCounts, "need i >= 1 and 0 <= j <= m");
    const int parts[3] = {i - 1, j, m - j};
    const double probs[3] = {1.0, chain.p_cw(), chain.p_ww()};
    LogFactorials lf;
    return multinomial_probability(parts, probs, lf) * std::pow(chain.p_sw(), i);
}

double edt_conditional(SlotState start, int phi, const SlotChain& chain, int l) {
    EdtSeries series(chain);
    return series.conditional(start, phi, l);
}

Pmf edt_pmf_fixed(int phi, const SlotChain& chain, int l_max) {
    return edt_pmf_fixed(phi, chain, l_max, chain.stationary());
}

Pmf edt_pmf_fixed(int phi, const SlotChain& chain, int l_max, const Vector3& initial) {
    if (phi < 1) throw Error(ErrorCode::InvalidCounts, "phi must be >= 1");
    if (l_max < phi) throw Error(ErrorCode::InvalidTruncation, "l_max must be >= phi");
    require_distribution(initial);

    EdtSeries series(chain);
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(l_max - phi + 1));
    for (int l = phi; l <= l_max; ++l) {
        double p = 0.0;
        for (SlotState s : kSlotStates) {
            if (initial[index(s)] > 0.0) p += initial[index(s)] * series.conditional(s, phi, l);
        }
        probs.push_back(p);
    }
    return Pmf(static_cast<std::size_t>(phi), std::move(probs), edt_survival(phi, chain, l_max, initial));
}

Pmf edt_pmf_fixed_auto(int phi, const SlotChain& chain, double tail_target) {
    if (phi < 1) throw Error(ErrorCode::InvalidCounts, "phi must be >= 1");
    const Vector3 initial = chain.stationary();
    const int l = grow_truncation(initial_truncation_guess(phi, chain, tail_target), tail_target,
                                  [&](int l_try) { return edt_survival(phi, chain, l_try, initial); });
    return edt_pmf_fixed(phi, chain, l, initial);
}

double edt_survival(int phi, const SlotChain& chain, int l, const Vector3& initial) {
    if (phi < 1) throw Error(ErrorCode::InvalidCounts, "phi must be >= 1");
    if (l < 1) return 1.0;
    CleanCountPropagator prop(chain, initial, phi);
    while (prop.slots() < l) prop.step();
    return prop.below(phi);
}

double waiting_decay_rate(const SlotChain& chain) {
    const double ww = chain.p_ww();
    return 0.5 * (ww + std::sqrt(ww * ww + 4.0 * chain.p_cw()));
}

void for_each_composition(std::span<const double> bits_per_region, int slots, double bits_cap,
                          const std::function<void(const ChannelComposition&, double bits)>& visit) {
    if (bits_per_region.empty() || bits_per_region[0] != 0.0) {
        throw Error(ErrorCode::InvalidParameter, "region 0 must carry zero bits");
    }
    if (slots < 0) throw Error(ErrorCode::InvalidCounts, "slot count must be nonnegative");
    ChannelComposition comp;
    comp.counts.assign(bits_per_region.size(), 0);
    const int regions = static_cast<int>(bits_per_region.size());

    // Fill regions N..1 depth-first, then region 0 takes the remaining slots.
    std::function<void(int, int, double)> recurse = [&](int region, int remaining, double bits) {
        if (region == 0) {
            comp.counts[0] = remaining;
            visit(comp, bits);
            comp.counts[0] = 0;
            return;
        }
        const double b = bits_per_region[static_cast<std::size_t>(region)];
        for (int n = 0; n <= remaining; ++n) {
            const double total = bits + n * b;
            if (total >= bits_cap) break;
            comp.counts[static_cast<std::size_t>(region)] = n;
            recurse(region - 1, remaining - n, total);
        }
        comp.counts[static_cast<std::size_t>(region)] = 0;
    };
    if (bits_cap > 0.0) recurse(regions - 1, slots, 0.0);
}

Pmf ttr_pmf(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec, int phi_max) {
    validate_ttr_inputs(scheme, pi, spec);
    if (phi_max < 1) throw Error(ErrorCode::InvalidTruncation, "phi_max must be >= 1");

    std::vector<double> bits(scheme.rates().size());
    for (std::size_t j = 0; j < bits.size(); ++j) bits[j] = spec.bits_per_slot(scheme.rates()[j]);

    LogFactorials lf;
    std::vector<double> probs(static_cast<std::size_t>(phi_max), 0.0);
    for (int phi = 1; phi <= phi_max; ++phi) {
        double p = 0.0;
        for_each_composition(bits, phi - 1, spec.h_t, [&](const ChannelComposition& c, double sent) {
            // last slot completes iff it lifts the total to h_t or beyond
            double finish = 0.0;
            for (std::size_t l = 0; l < bits.size(); ++l) {
                if (sent + bits[l] >= spec.h_t) finish += pi.pi[l];
            }
            if (finish > 0.0) p += finish * multinomial_probability(c.counts, pi.pi, lf);
        });
        probs[static_cast<std::size_t>(phi - 1)] = p;
    }

    double tail = 0.0;
    for_each_composition(bits, phi_max, spec.h_t, [&](const ChannelComposition& c, double) {
        tail += multinomial_probability(c.counts, pi.pi, lf);
    });
    return Pmf(1, std::move(probs), tail);
}

Pmf ttr_pmf_auto(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec, double tail_target) {
    validate_ttr_inputs(scheme, pi, spec);
    const int phi_min = slots_required(spec, scheme.rates().back());
    int phi_max = 2 * phi_min + 8;
    for (;;) {
        Pmf out = ttr_pmf(scheme, pi, spec, phi_max);
        if (out.tail_bound() < tail_target) return out;
        if (phi_max > 100'000) {
            throw Error(ErrorCode::InvalidTruncation, "transmission-time tail does not fall below target");
        }
        phi_max *= 2;
    }
}

Pmf edt_pmf_adaptive(const AmScheme& scheme, const RateDistribution& pi, const PacketSpec& spec,
                     const SlotChain& chain, int l_max) {
    if (l_max < 0) throw Error(ErrorCode::InvalidTruncation, "l_max must be nonnegative");
    const Pmf ttr = ttr_pmf_auto(scheme, pi, spec, kDefaultTailTarget);
    const Vector3 initial = chain.stationary();

    std::vector<std::pair<int, double>> weights;
    for (std::size_t phi = ttr.first(); phi <= ttr.last(); ++phi) {
        if (ttr.at(phi) > 0.0) weights.emplace_back(static_cast<int>(phi), ttr.at(phi));
    }
    const int phi_lo = weights.front().first;
    const int phi_hi = weights.back().first;

    // Tail of the mixture beyond l: sum_phi Pr[T_tr = phi] Pr[fewer than phi clean slots in l].
    auto mixture_tail = [&](int l) {
        CleanCountPropagator prop(chain, initial, phi_hi);
        while (prop.slots() < l) prop.step();
        double tail = 0.0;
        for (const auto& [phi, w] : weights) tail += w * prop.below(phi);
        return tail;
    };

    if (l_max == 0) {
        l_max = grow_truncation(initial_truncation_guess(phi_hi, chain, kDefaultTailTarget), kDefaultTailTarget,
                                mixture_tail);
    }
    if (l_max < phi_lo) {
        return Pmf(static_cast<std::size_t>(phi_lo), {}, 1.0);
    }

    EdtSeries series(chain);
    std::vector<double> probs(static_cast<std::size_t>(l_max - phi_lo + 1), 0.0);
    for (const auto& [phi, w] : weights) {
        for (int l = phi; l <= l_max; ++l) {
            double p = 0.0;
            for (SlotState s : kSlotStates) {
                if (initial[index(s)] > 0.0) p += initial[index(s)] * series.conditional(s, phi, l);
            }
            probs[static_cast<std::size_t>(l - phi_lo)] += w * p;
        }
    }
    return Pmf(static_cast<std::size_t>(phi_lo), std::move(probs), ttr.tail_bound() + mixture_tail(l_max));
}

} // namespace slotcr
