#include "slotcr/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slotcr/error.hpp"

namespace slotcr {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidParameter, what); }

} // namespace

double qam_ber(int n, double gamma) {
    if (n < 1) invalid("QAM order exponent must be >= 1");
    if (!(gamma >= 0.0)) invalid("SNR must be nonnegative");
    if (std::isinf(gamma)) return 0.0;
    return 0.2 * std::exp(-1.5 * gamma / (std::ldexp(1.0, n) - 1.0));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

AmScheme::AmScheme(std::vector<double> rates, std::vector<double> thresholds, double ber_target)
    : rates_(std::move(rates)), thresholds_(std::move(thresholds)), ber_target_(ber_target) {
    if (rates_.empty() || rates_.front() != 0.0) invalid("rate ladder must start at R_0 = 0");
    if (rates_.size() != thresholds_.size() + 1) invalid("need exactly one threshold per nonzero rate");
    for (std::size_t j = 1; j < rates_.size(); ++j) {
        if (!std::isfinite(rates_[j]) || rates_[j] <= rates_[j - 1]) invalid("rates must be strictly increasing");
    }
    for (std::size_t j = 0; j < thresholds_.size(); ++j) {
        if (!std::isfinite(thresholds_[j]) || thresholds_[j] <= 0.0) invalid("thresholds must be positive");
        if (j > 0 && thresholds_[j] <= thresholds_[j - 1]) invalid("thresholds must be strictly increasing");
    }
}

std::size_t AmScheme::rate_index(double gamma) const {
    // number of thresholds <= gamma
    return static_cast<std::size_t>(std::upper_bound(thresholds_.begin(), thresholds_.end(), gamma) -
                                    thresholds_.begin());
}

AmScheme rate_thresholds(double ber_target, int n_rates) {
    if (!(ber_target > 0.0 && ber_target < 0.2)) invalid("target BER must lie in (0, 0.2)");
    if (n_rates < 1) invalid("need at least one nonzero rate");
    const double scale = -(2.0 / 3.0) * std::log(5.0 * ber_target);
    std::vector<double> rates(static_cast<std::size_t>(n_rates) + 1);
    std::vector<double> thresholds(static_cast<std::size_t>(n_rates));
    for (int j = 0; j <= n_rates; ++j) rates[static_cast<std::size_t>(j)] = j;
    for (int j = 1; j <= n_rates; ++j) {
        thresholds[static_cast<std::size_t>(j - 1)] = scale * (std::ldexp(1.0, j) - 1.0);
    }
    return AmScheme(std::move(rates), std::move(thresholds), ber_target);
}

FadingModel FadingModel::rayleigh(double mean_snr) {
    if (!std::isfinite(mean_snr) || mean_snr <= 0.0) invalid("mean SNR must be positive and finite");
    return FadingModel(RayleighFading{mean_snr});
}

FadingModel FadingModel::tabulated(std::vector<double> snr, std::vector<double> cdf) {
    if (snr.empty() || snr.size() != cdf.size()) invalid("tabulated CDF needs matching, nonempty columns");
    for (std::size_t k = 0; k < snr.size(); ++k) {
        if (!(snr[k] > 0.0) || !std::isfinite(snr[k])) invalid("tabulated SNR points must be positive");
        if (!(cdf[k] >= 0.0 && cdf[k] <= 1.0)) invalid("tabulated CDF values must lie in [0, 1]");
        if (k > 0 && (snr[k] <= snr[k - 1] || cdf[k] < cdf[k - 1])) {
            invalid("tabulated CDF must be monotone in strictly increasing SNR");
        }
    }
    if (cdf.back() != 1.0) invalid("tabulated CDF must reach 1");
    return FadingModel(TabulatedFading{std::move(snr), std::move(cdf)});
}

double FadingModel::cdf(double gamma) const {
    if (gamma <= 0.0) return 0.0;
    if (std::isinf(gamma)) return 1.0;
    if (const auto* r = std::get_if<RayleighFading>(&model_)) {
        return -std::expm1(-gamma / r->mean_snr);
    }
    const auto& t = std::get<TabulatedFading>(model_);
    if (gamma >= t.snr.back()) return 1.0;
    const auto hi = static_cast<std::size_t>(std::upper_bound(t.snr.begin(), t.snr.end(), gamma) - t.snr.begin());
    const double x0 = hi == 0 ? 0.0 : t.snr[hi - 1];
    const double y0 = hi == 0 ? 0.0 : t.cdf[hi - 1];
    return y0 + (t.cdf[hi] - y0) * (gamma - x0) / (t.snr[hi] - x0);
}

double FadingModel::survival(double gamma) const {
    if (gamma <= 0.0) return 1.0;
    if (const auto* r = std::get_if<RayleighFading>(&model_)) {
        return std::exp(-gamma / r->mean_snr);
    }
    return 1.0 - cdf(gamma);
}

double FadingModel::inverse_cdf(double u) const {
    if (!(u >= 0.0 && u < 1.0)) invalid("inverse CDF argument must lie in [0, 1)");
    if (const auto* r = std::get_if<RayleighFading>(&model_)) {
        return -r->mean_snr * std::log1p(-u);
    }
    const auto& t = std::get<TabulatedFading>(model_);
    // first knot whose CDF reaches u
    const auto hi = static_cast<std::size_t>(std::lower_bound(t.cdf.begin(), t.cdf.end(), u) - t.cdf.begin());
    const double x0 = hi == 0 ? 0.0 : t.snr[hi - 1];
    const double y0 = hi == 0 ? 0.0 : t.cdf[hi - 1];
    if (t.cdf[hi] == y0) return t.snr[hi];
    return x0 + (t.snr[hi] - x0) * (u - y0) / (t.cdf[hi] - y0);
}

void RateDistribution::validate() const {
    if (pi.empty()) invalid("rate distribution is empty");
    double total = 0.0;
    for (double p : pi) {
        if (!(p >= 0.0) || !std::isfinite(p)) invalid("rate probabilities must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) invalid("rate probabilities must sum to 1");
}

double RateDistribution::mean_index() const {
    double m = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) m += static_cast<double>(j) * pi[j];
    return m;
}

RateDistribution rate_probabilities(const AmScheme& scheme, const FadingModel& fading) {
    const auto& t = scheme.thresholds();
    RateDistribution out;
    out.pi.resize(t.size() + 1);
    if (t.empty()) {
        out.pi[0] = 1.0;
        return out;
    }
    double lower = 0.0;
    for (std::size_t j = 0; j <= t.size(); ++j) {
        if (j == t.size()) {
            out.pi[j] = fading.survival(t[j - 1]);
            break;
        }
        const double upper = fading.cdf(t[j]);
        out.pi[j] = upper - lower;
        lower = upper;
    }
    return out;
}

} // namespace slotcr
