#include "slotcr/pmf.hpp"

#include <algorithm>
#include <cmath>

#include "slotcr/error.hpp"

namespace slotcr {

Pmf::Pmf(std::size_t first, std::vector<double> probs, double tail_bound)
    : first_(first), probs_(std::move(probs)), tail_bound_(tail_bound) {
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidProbability, "negative PMF mass");
    }
    if (!(tail_bound_ >= 0.0)) throw Error(ErrorCode::InvalidProbability, "negative tail bound");
}

Pmf Pmf::from_samples(std::span<const std::uint32_t> samples) {
    if (samples.empty()) return {};
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    std::vector<double> counts(*hi - *lo + 1, 0.0);
    for (auto s : samples) counts[s - *lo] += 1.0;
    const double n = static_cast<double>(samples.size());
    for (auto& c : counts) c /= n;
    return Pmf(*lo, std::move(counts), 0.0);
}

double Pmf::at(std::size_t l) const noexcept {
    if (l < first_ || l - first_ >= probs_.size()) return 0.0;
    return probs_[l - first_];
}

double Pmf::total() const {
    double t = 0.0;
    for (double p : probs_) t += p;
    return t;
}

double Pmf::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) m += static_cast<double>(first_ + i) * probs_[i];
    return m / total();
}

double Pmf::variance() const {
    const double mu = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        const double d = static_cast<double>(first_ + i) - mu;
        v += d * d * probs_[i];
    }
    return v / total();
}

namespace {

template <typename F>
void for_union(const Pmf& a, const Pmf& b, F&& f) {
    if (a.empty() && b.empty()) return;
    std::size_t lo = a.empty() ? b.first() : (b.empty() ? a.first() : std::min(a.first(), b.first()));
    std::size_t hi = a.empty() ? b.last() : (b.empty() ? a.last() : std::max(a.last(), b.last()));
    for (std::size_t l = lo; l <= hi; ++l) f(a.at(l), b.at(l));
}

} // namespace

double total_variation(const Pmf& a, const Pmf& b) {
    double d = 0.0;
    for_union(a, b, [&](double x, double y) { d += std::abs(x - y); });
    return 0.5 * (d + std::abs(a.tail_bound() - b.tail_bound()));
}

double max_abs_difference(const Pmf& a, const Pmf& b) {
    double d = 0.0;
    for_union(a, b, [&](double x, double y) { d = std::max(d, std::abs(x - y)); });
    return d;
}

} // namespace slotcr
