#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace slotcr {

/**
 * Probability mass function over contiguous slot counts first()..last().
 *
 * tail_bound() bounds the mass that fell outside the stored support (usually
 * beyond last()). For exact computations it is the missing mass itself, so
 * total() + tail_bound() = 1 up to rounding.
 */
class Pmf {
  public:
    Pmf() = default;
    Pmf(std::size_t first, std::vector<double> probs, double tail_bound = 0.0);

    /// Empirical PMF of integer samples; tail_bound is zero.
    static Pmf from_samples(std::span<const std::uint32_t> samples);

    std::size_t first() const noexcept { return first_; }
    /// Last support point; equals first() - 1 when empty.
    std::size_t last() const noexcept { return first_ + probs_.size() - 1; }
    std::size_t size() const noexcept { return probs_.size(); }
    bool empty() const noexcept { return probs_.empty(); }
    const std::vector<double>& probs() const noexcept { return probs_; }
    double tail_bound() const noexcept { return tail_bound_; }

    /// Mass at L; zero outside the stored support.
    double at(std::size_t l) const noexcept;

    double total() const;
    /// Moments of the stored (truncated) mass, normalized by total().
    double mean() const;
    double variance() const;

  private:
    std::size_t first_ = 0;
    std::vector<double> probs_;
    double tail_bound_ = 0.0;
};

/// Half the L1 distance over the union of supports, plus half the tail-mass gap.
double total_variation(const Pmf& a, const Pmf& b);

/// max_L |a(L) - b(L)| over the union of supports.
double max_abs_difference(const Pmf& a, const Pmf& b);

} // namespace slotcr
