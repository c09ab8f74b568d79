#pragma once

#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

namespace slotcr {

/// Approximate BER of 2^n-ary square QAM at linear SNR gamma.
double qam_ber(int n, double gamma);

double db_to_linear(double db);
double linear_to_db(double linear);

/**
 * Adaptive modulation ladder.
 *
 * rates() = (R_0 = 0, R_1, ..., R_N) in bits/symbol, thresholds() = (t_1, ..., t_N)
 * in linear SNR. Rate R_j is used on region [t_j, t_{j+1}) with t_0 = 0 and
 * t_{N+1} = infinity.
 */
class AmScheme {
  public:
    /// Throws Error(InvalidParameter) unless rates are strictly increasing from 0
    /// and thresholds are positive, strictly increasing, one per nonzero rate.
    AmScheme(std::vector<double> rates, std::vector<double> thresholds,
             double ber_target = std::numeric_limits<double>::quiet_NaN());

    std::size_t n_rates() const noexcept { return thresholds_.size(); }
    const std::vector<double>& rates() const noexcept { return rates_; }
    const std::vector<double>& thresholds() const noexcept { return thresholds_; }
    /// NaN when the thresholds were supplied directly.
    double ber_target() const noexcept { return ber_target_; }

    /// Index j of the region containing gamma.
    std::size_t rate_index(double gamma) const;

  private:
    std::vector<double> rates_;
    std::vector<double> thresholds_;
    double ber_target_;
};

/// Square-QAM ladder R_j = j with t_j = -(2/3) ln(5 BER) (2^j - 1).
AmScheme rate_thresholds(double ber_target, int n_rates);

struct RayleighFading {
    double mean_snr = 1.0; ///< linear
};

/// Piecewise-linear CDF through (snr[k], cdf[k]), anchored at (0, 0).
struct TabulatedFading {
    std::vector<double> snr;
    std::vector<double> cdf;
};

/// Distribution of the received linear SNR, accessed through its CDF.
class FadingModel {
  public:
    static FadingModel rayleigh(double mean_snr);
    static FadingModel tabulated(std::vector<double> snr, std::vector<double> cdf);

    double cdf(double gamma) const;
    /// 1 - cdf(gamma), evaluated without cancellation where the model allows it.
    double survival(double gamma) const;
    /// Smallest gamma with cdf(gamma) >= u, for sampling by inversion.
    double inverse_cdf(double u) const;

    const std::variant<RayleighFading, TabulatedFading>& descriptor() const noexcept { return model_; }

  private:
    explicit FadingModel(std::variant<RayleighFading, TabulatedFading> model) : model_(std::move(model)) {}
    std::variant<RayleighFading, TabulatedFading> model_;
};

struct RateDistribution {
    std::vector<double> pi; ///< (pi_0, ..., pi_N)

    void validate() const;
    std::size_t size() const noexcept { return pi.size(); }
    /// sum_j j pi_j: mean packets per clean slot with an unbounded queue.
    double mean_index() const;
};

/// pi_j = F(t_{j+1}) - F(t_j).
RateDistribution rate_probabilities(const AmScheme& scheme, const FadingModel& fading);

} // namespace slotcr
