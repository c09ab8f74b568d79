#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slotcr/edt.hpp"
#include "slotcr/modulation.hpp"
#include "slotcr/oracles.hpp"
#include "slotcr/primary_chain.hpp"
#include "slotcr/queueing.hpp"

namespace slotcr::cli {

/// Dotted key -> raw value; list values are comma separated.
using FlatConfig = std::map<std::string, std::string>;

/// Reads a YAML file of nested sections into dotted keys.
FlatConfig load_config_file(const std::string& path);
FlatConfig parse_config_text(const std::string& text);

/// Applies "section.key=value".
void apply_override(FlatConfig& config, const std::string& assignment);

/// Fully resolved parameter bundle. Times are in milliseconds and SNRs in dB
/// here; conversion to seconds and linear SNR happens in the accessors.
struct Scenario {
    double lambda_ms = 30.0;
    double mu_ms = 10.0;
    double ts_ms = 1.0;

    double ber_target = 1e-3;
    int n_rates = 3;
    std::vector<double> rates;         ///< optional explicit ladder (R_0 = 0 first)
    std::vector<double> thresholds_db; ///< required with an explicit ladder

    std::string fading_model = "rayleigh";
    double mean_snr_db = 20.0;
    std::vector<double> table_snr_db;
    std::vector<double> table_cdf;

    double p_a = 0.2;
    int capacity = 30;

    double h_t_bits = 8000.0;
    double symbols_per_slot = 500.0;
    double fixed_rate = 2.0;
    int l_max = 0;

    std::uint64_t seed = 1;
    std::uint64_t slots = 1'000'000;
    std::uint64_t samples = 100'000;
    std::uint64_t burn_in = 10'000;
    SimMode mode = SimMode::Discretized;
    int workers = 1;

    std::vector<double> collision_lambda_ms{10.0, 30.0};
    std::vector<double> collision_mu_ms{10.0, 30.0};
    std::vector<double> collision_ts_ms{0.5, 1.0, 2.0, 4.0, 8.0};

    std::vector<double> queue_dist_lambda_ms{20.0, 30.0};
    std::vector<double> queue_dist_ts_ms{1.0, 2.0};
    std::vector<double> queue_dist_mean_snr_db{10.0, 20.0};

    std::vector<double> queue_metrics_p_a;
    std::vector<double> queue_metrics_lambda_ms{30.0};
    std::vector<double> queue_metrics_mu_ms{10.0};
    std::vector<double> queue_metrics_mean_snr_db{10.0, 20.0};

    std::vector<double> edt_fixed_h_t_bits{4000.0, 8000.0};
    std::vector<double> edt_fixed_lambda_ms{10.0, 30.0};
    std::vector<double> edt_fixed_mu_ms{10.0, 30.0};

    std::vector<double> edt_adaptive_mean_snr_db{5.0, 10.0, 15.0, 20.0};
    std::vector<double> edt_adaptive_h_t_bits{8000.0};

    Scenario();

    /// Throws Error(ConfigParse) on unknown keys or unparseable values and
    /// Error(InvalidConfig) when a sub-model rejects its parameters.
    static Scenario from_config(const FlatConfig& config);
    FlatConfig to_config() const;
    /// One-line "key=value;..." record of every resolved parameter.
    std::string describe() const;

    void validate() const;

    PrimaryTrafficModel primary() const { return {lambda_ms * 1e-3, mu_ms * 1e-3}; }
    SensingConfig sensing() const { return {ts_ms * 1e-3}; }
    AmScheme scheme() const;
    FadingModel fading() const;
    ArrivalModel arrivals() const { return {p_a}; }
    QueueConfig queue() const { return {capacity}; }
    PacketSpec packet() const { return {h_t_bits, symbols_per_slot}; }
    SimConfig sim_config() const;
};

} // namespace slotcr::cli
