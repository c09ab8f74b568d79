#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "slotcr/modulation.hpp"
#include "test_util.hpp"

using namespace slotcr;

namespace {

/// Composite Simpson rule.
template <typename F>
double simpson(F f, double a, double b, int intervals = 20000) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int k = 1; k < intervals; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Region probabilities by integrating the Rayleigh SNR density.
std::vector<double> quadrature_rates(const AmScheme& scheme, double mean_snr) {
    auto pdf = [mean_snr](double g) { return std::exp(-g / mean_snr) / mean_snr; };
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), scheme.thresholds().begin(), scheme.thresholds().end());
    edges.push_back(scheme.thresholds().back() + 60.0 * mean_snr);
    std::vector<double> out;
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) out.push_back(simpson(pdf, edges[j], edges[j + 1]));
    return out;
}

} // namespace

TEST(Modulation, ThresholdsHitTargetBer) {
    for (double ber : {1e-2, 1e-3, 1e-6}) {
        const AmScheme s = rate_thresholds(ber, 5);
        ASSERT_EQ(s.n_rates(), 5u);
        for (int j = 1; j <= 5; ++j) {
            EXPECT_NEAR(qam_ber(j, s.thresholds()[static_cast<std::size_t>(j - 1)]) / ber, 1.0, 1e-12);
            EXPECT_DOUBLE_EQ(s.rates()[static_cast<std::size_t>(j)], j);
        }
    }
}

TEST(Modulation, ThresholdValuesAtDefaultBer) {
    const AmScheme s = rate_thresholds(1e-3, 3);
    const double t1 = -(2.0 / 3.0) * std::log(5e-3);
    EXPECT_NEAR(s.thresholds()[0], t1, 1e-15);
    EXPECT_NEAR(s.thresholds()[1], 3 * t1, 1e-14);
    EXPECT_NEAR(s.thresholds()[2], 7 * t1, 1e-14);
    EXPECT_NEAR(t1, 3.5322, 1e-4);
}

TEST(Modulation, RateIndexBoundaries) {
    const AmScheme s({0, 1, 2}, {1.0, 4.0});
    EXPECT_EQ(s.rate_index(0.0), 0u);
    EXPECT_EQ(s.rate_index(0.999), 0u);
    EXPECT_EQ(s.rate_index(1.0), 1u);
    EXPECT_EQ(s.rate_index(3.999), 1u);
    EXPECT_EQ(s.rate_index(4.0), 2u);
    EXPECT_EQ(s.rate_index(1e300), 2u);
}

TEST(Modulation, RayleighRatesMatchQuadrature) {
    for (double db : {0.0, 5.0, 10.0, 20.0, 30.0}) {
        const AmScheme s = rate_thresholds(1e-3, 4);
        const double mean = db_to_linear(db);
        const RateDistribution pi = rate_probabilities(s, FadingModel::rayleigh(mean));
        const auto oracle = quadrature_rates(s, mean);
        ASSERT_EQ(pi.size(), oracle.size());
        for (std::size_t j = 0; j < pi.size(); ++j) EXPECT_NEAR(pi.pi[j], oracle[j], 1e-9) << db << " dB, j=" << j;
        EXPECT_NEAR(std::accumulate(pi.pi.begin(), pi.pi.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(Modulation, HigherMeanSnrShiftsMassUp) {
    const AmScheme s = rate_thresholds(1e-3, 3);
    double prev = -1.0;
    for (double db : {5.0, 10.0, 15.0, 20.0}) {
        const double m = rate_probabilities(s, FadingModel::rayleigh(db_to_linear(db))).mean_index();
        EXPECT_GT(m, prev);
        prev = m;
    }
}

TEST(Modulation, SingleRegionWhenNoNonzeroRate) {
    const AmScheme s({0.0}, {});
    const RateDistribution pi = rate_probabilities(s, FadingModel::rayleigh(10.0));
    ASSERT_EQ(pi.size(), 1u);
    EXPECT_EQ(pi.pi[0], 1.0);
}

TEST(Modulation, TabulatedFading) {
    const FadingModel f = FadingModel::tabulated({1.0, 2.0, 4.0}, {0.2, 0.6, 1.0});
    EXPECT_DOUBLE_EQ(f.cdf(0.5), 0.1);
    EXPECT_DOUBLE_EQ(f.cdf(1.5), 0.4);
    EXPECT_DOUBLE_EQ(f.cdf(3.0), 0.8);
    EXPECT_DOUBLE_EQ(f.cdf(5.0), 1.0);
    EXPECT_DOUBLE_EQ(f.survival(3.0), 0.2);
    for (double u : {0.0, 0.05, 0.2, 0.33, 0.6, 0.99}) EXPECT_NEAR(f.cdf(f.inverse_cdf(u)), u, 1e-15);

    const AmScheme s({0, 1, 2}, {1.0, 2.0});
    const RateDistribution pi = rate_probabilities(s, f);
    EXPECT_NEAR(pi.pi[0], 0.2, 1e-15);
    EXPECT_NEAR(pi.pi[1], 0.4, 1e-15);
    EXPECT_NEAR(pi.pi[2], 0.4, 1e-15);
}

TEST(Modulation, RayleighInverseCdf) {
    const FadingModel f = FadingModel::rayleigh(3.0);
    for (double u : {0.0, 0.1, 0.5, 0.9, 0.999999}) EXPECT_NEAR(f.cdf(f.inverse_cdf(u)), u, 1e-14);
    EXPECT_NEAR(f.survival(6.0), std::exp(-2.0), 1e-16);
}

TEST(Modulation, RejectsInvalidLadders) {
    EXPECT_ERROR_CODE(AmScheme({1, 2}, {1.0}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(AmScheme({0, 2, 1}, {1.0, 2.0}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(AmScheme({0, 1, 2}, {2.0, 1.0}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(AmScheme({0, 1}, {1.0, 2.0}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(AmScheme({0, 1}, {-1.0}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(rate_thresholds(0.0, 3), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(rate_thresholds(1e-3, 0), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(FadingModel::rayleigh(0.0), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(FadingModel::tabulated({1.0, 2.0}, {0.5, 0.9}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE(FadingModel::tabulated({2.0, 1.0}, {0.5, 1.0}), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE((RateDistribution{{0.5, 0.4}}.validate()), ErrorCode::InvalidParameter);
    EXPECT_ERROR_CODE((RateDistribution{{1.5, -0.5}}.validate()), ErrorCode::InvalidParameter);
}

TEST(Modulation, DecibelConversion) {
    EXPECT_DOUBLE_EQ(db_to_linear(20.0), 100.0);
    EXPECT_DOUBLE_EQ(linear_to_db(1000.0), 30.0);
    EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
}
