#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <numeric>

#include "slotcr/error.hpp"
#include "slotcr/oracles.hpp"
#include "slotcr/rng.hpp"

namespace slotcr {

namespace {

constexpr int kBatches = 20;
constexpr std::uint64_t kMaxEdtSlots = 100'000'000;

/// Sensed PU state follows the two-state chain with persistence (beta_on, beta_off).
class DiscretizedPu {
  public:
    DiscretizedPu(const PrimaryTrafficModel& model, const SensingConfig& cfg, CounterRng& rng) : rng_(rng) {
        const auto beta = beta_probs(model, cfg);
        beta_on_ = beta.beta_on;
        beta_off_ = beta.beta_off;
        const double denom = 2.0 - beta_on_ - beta_off_;
        const double p_on = denom > 0.0 ? (1.0 - beta_off_) / denom : model.lambda / (model.lambda + model.mu);
        now_ = rng_.bernoulli(p_on);
        next_ = draw(now_);
    }

    SlotState next_slot() {
        const SlotState s = now_ ? SlotState::W : (next_ ? SlotState::C : SlotState::S);
        now_ = next_;
        next_ = draw(now_);
        return s;
    }

  private:
    bool draw(bool on) { return on ? rng_.bernoulli(beta_on_) : !rng_.bernoulli(beta_off_); }

    CounterRng& rng_;
    double beta_on_ = 0.0;
    double beta_off_ = 0.0;
    bool now_ = false;
    bool next_ = false;
};

/// Continuous-time on/off process sensed at slot starts. A transmitting slot is a
/// collision as soon as the PU turns on anywhere inside it.
class CtmcPu {
  public:
    CtmcPu(const PrimaryTrafficModel& model, const SensingConfig& cfg, CounterRng& rng)
        : rng_(rng), lambda_(model.lambda), mu_(model.mu), ts_(cfg.ts) {
        on_ = rng_.bernoulli(lambda_ / (lambda_ + mu_));
        next_switch_ = rng_.exponential(on_ ? lambda_ : mu_);
    }

    SlotState next_slot() {
        const double end = static_cast<double>(slot_ + 1) * ts_;
        const SlotState s = on_ ? SlotState::W : (next_switch_ <= end ? SlotState::C : SlotState::S);
        while (next_switch_ <= end) {
            on_ = !on_;
            next_switch_ += rng_.exponential(on_ ? lambda_ : mu_);
        }
        ++slot_;
        return s;
    }

  private:
    CounterRng& rng_;
    double lambda_, mu_, ts_;
    bool on_ = false;
    double next_switch_ = 0.0;
    std::uint64_t slot_ = 0;
};

double ci95_of_batches(const std::vector<double>& batch_means) {
    const double n = static_cast<double>(batch_means.size());
    if (n < 2) return 0.0;
    const double mean = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / n;
    double var = 0.0;
    for (double b : batch_means) var += (b - mean) * (b - mean);
    var /= (n - 1.0);
    return 1.96 * std::sqrt(var / n);
}

template <typename T>
double batch_means_ci95(const std::vector<T>& samples) {
    if (samples.size() < 2 * kBatches) return 0.0;
    const std::size_t per = samples.size() / kBatches;
    std::vector<double> means;
    for (int b = 0; b < kBatches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += static_cast<double>(samples[i]);
        means.push_back(s / static_cast<double>(per));
    }
    return ci95_of_batches(means);
}

template <typename T>
double sample_mean(const std::vector<T>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (auto x : v) s += static_cast<double>(x);
    return s / static_cast<double>(v.size());
}

template <typename T>
double iid_ci95(const std::vector<T>& v) {
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    double var = 0.0;
    for (auto x : v) var += (static_cast<double>(x) - m) * (static_cast<double>(x) - m);
    var /= static_cast<double>(v.size() - 1);
    return 1.96 * std::sqrt(var / static_cast<double>(v.size()));
}

template <typename Pu>
void run_queue(const SimConfig& config, SimReport& report) {
    const auto& sc = config.scenario;
    CounterRng rng(config.seed, 2 * config.stream);
    Pu pu(sc.primary, sc.sensing, rng);

    const int capacity = sc.queue.capacity;
    const std::uint64_t total = config.burn_in + config.n_slots;
    const std::uint64_t per_batch = std::max<std::uint64_t>(1, config.n_slots / kBatches);

    std::deque<std::uint64_t> queue; // arrival slot of each waiting packet
    report.queue_hist.assign(static_cast<std::size_t>(capacity) + 1, 0.0);
    std::vector<std::array<double, 3>> batch_counts(kBatches, std::array<double, 3>{});
    std::uint64_t departures_measured = 0;
    std::uint64_t arrivals_measured = 0;
    std::uint64_t drops_measured = 0;

    for (std::uint64_t t = 0; t < total; ++t) {
        const bool measuring = t >= config.burn_in;
        if (measuring) report.queue_hist[queue.size()] += 1.0;

        const SlotState state = pu.next_slot();
        if (measuring) {
            ++report.state_counts[index(state)];
            const auto b = std::min<std::uint64_t>((t - config.burn_in) / per_batch, kBatches - 1);
            batch_counts[b][index(state)] += 1.0;
        }

        if (state == SlotState::S) {
            const std::size_t j = sc.scheme.rate_index(sc.fading.inverse_cdf(rng.uniform()));
            const std::size_t departures = std::min(j, queue.size());
            for (std::size_t d = 0; d < departures; ++d) {
                const std::uint64_t arrived = queue.front();
                queue.pop_front();
                ++report.served;
                if (measuring) ++departures_measured;
                if (arrived >= config.burn_in) {
                    report.delay_samples.push_back(static_cast<std::uint32_t>(t - arrived));
                }
            }
        }

        if (rng.bernoulli(sc.arrivals.p_a)) {
            ++report.arrivals;
            if (measuring) ++arrivals_measured;
            if (static_cast<int>(queue.size()) >= capacity) {
                ++report.dropped;
                if (measuring) ++drops_measured;
            } else {
                queue.push_back(t);
                ++report.admitted;
            }
        }
    }

    report.slots = config.n_slots;
    report.in_queue_at_end = queue.size();
    const double n = static_cast<double>(config.n_slots);
    for (auto& h : report.queue_hist) h /= n;
    for (std::size_t s = 0; s < 3; ++s) {
        report.state_freq[s] = static_cast<double>(report.state_counts[s]) / n;
        std::vector<double> means;
        for (int b = 0; b < kBatches; ++b) {
            const double len = b + 1 < kBatches ? static_cast<double>(per_batch)
                                                : n - static_cast<double>(per_batch) * (kBatches - 1);
            if (len > 0) means.push_back(batch_counts[static_cast<std::size_t>(b)][s] / len);
        }
        report.state_ci95[s] = ci95_of_batches(means);
    }
    report.throughput = static_cast<double>(departures_measured) / n;
    report.drop_rate =
        arrivals_measured > 0 ? static_cast<double>(drops_measured) / static_cast<double>(arrivals_measured) : 0.0;
    report.mean_delay = sample_mean(report.delay_samples);
    report.mean_delay_ci95 = batch_means_ci95(report.delay_samples);
}

template <typename Pu>
void run_edt(const SimConfig& config, SimReport& report) {
    const auto& sc = config.scenario;
    CounterRng rng(config.seed, 2 * config.stream + 1);
    const int phi = sc.fixed_rate ? slots_required(sc.packet, *sc.fixed_rate) : 0;

    report.edt_samples.reserve(config.n_edt_samples);
    for (std::uint64_t k = 0; k < config.n_edt_samples; ++k) {
        Pu pu(sc.primary, sc.sensing, rng); // fresh PU drawn from its stationary law
        int clean = 0;
        double bits = 0.0;
        std::uint64_t l = 0;
        for (;;) {
            ++l;
            if (l > kMaxEdtSlots) throw Error(ErrorCode::NoConvergence, "EDT sample did not complete");
            if (pu.next_slot() != SlotState::S) continue;
            if (sc.fixed_rate) {
                if (++clean == phi) break;
            } else {
                const std::size_t j = sc.scheme.rate_index(sc.fading.inverse_cdf(rng.uniform()));
                bits += sc.packet.bits_per_slot(sc.scheme.rates()[j]);
                if (bits >= sc.packet.h_t) break;
            }
        }
        report.edt_samples.push_back(static_cast<std::uint32_t>(l));
    }
    report.mean_edt = sample_mean(report.edt_samples);
    report.mean_edt_ci95 = iid_ci95(report.edt_samples);
}

} // namespace

void SimConfig::validate() const {
    scenario.primary.validate();
    scenario.sensing.validate();
    scenario.arrivals.validate();
    scenario.queue.validate();
    if (n_edt_samples > 0) {
        scenario.packet.validate();
        if (scenario.fixed_rate && !(*scenario.fixed_rate > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, "fixed rate must be positive");
        }
    }
    if (n_slots == 0 && n_edt_samples == 0) throw Error(ErrorCode::InvalidConfig, "nothing to simulate");
}

double SimReport::mean_queue() const {
    double m = 0.0;
    for (std::size_t k = 0; k < queue_hist.size(); ++k) m += static_cast<double>(k) * queue_hist[k];
    return m;
}

SimReport simulate(const SimConfig& config) {
    try {
        config.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    SimReport report;
    if (config.mode == SimMode::Discretized) {
        if (config.n_slots > 0) run_queue<DiscretizedPu>(config, report);
        run_edt<DiscretizedPu>(config, report);
    } else {
        if (config.n_slots > 0) run_queue<CtmcPu>(config, report);
        run_edt<CtmcPu>(config, report);
    }
    return report;
}

SimReport simulate_replications(const SimConfig& config, int replications, int workers) {
    if (replications < 1) throw Error(ErrorCode::InvalidConfig, "need at least one replication");
    workers = std::max(1, workers);

    std::vector<SimReport> reports(static_cast<std::size_t>(replications));
    for (int first = 0; first < replications; first += workers) {
        std::vector<std::future<SimReport>> running;
        for (int r = first; r < std::min(replications, first + workers); ++r) {
            SimConfig c = config;
            c.stream = config.stream + static_cast<std::uint64_t>(r);
            running.push_back(std::async(std::launch::async, [c] { return simulate(c); }));
        }
        for (std::size_t k = 0; k < running.size(); ++k) reports[static_cast<std::size_t>(first) + k] = running[k].get();
    }
    if (replications == 1) return reports.front();

    SimReport out;
    out.queue_hist.assign(reports.front().queue_hist.size(), 0.0);
    const double reps = static_cast<double>(replications);
    std::array<std::vector<double>, 3> freqs;
    std::vector<double> delays;
    for (const auto& r : reports) {
        out.slots += r.slots;
        for (std::size_t s = 0; s < 3; ++s) {
            out.state_counts[s] += r.state_counts[s];
            freqs[s].push_back(r.state_freq[s]);
        }
        for (std::size_t k = 0; k < out.queue_hist.size(); ++k) out.queue_hist[k] += r.queue_hist[k] / reps;
        out.arrivals += r.arrivals;
        out.admitted += r.admitted;
        out.dropped += r.dropped;
        out.served += r.served;
        out.in_queue_at_end += r.in_queue_at_end;
        out.throughput += r.throughput / reps;
        out.drop_rate += r.drop_rate / reps;
        out.delay_samples.insert(out.delay_samples.end(), r.delay_samples.begin(), r.delay_samples.end());
        out.edt_samples.insert(out.edt_samples.end(), r.edt_samples.begin(), r.edt_samples.end());
        delays.push_back(r.mean_delay);
    }
    for (std::size_t s = 0; s < 3; ++s) {
        out.state_freq[s] = out.slots > 0 ? static_cast<double>(out.state_counts[s]) / static_cast<double>(out.slots) : 0.0;
        out.state_ci95[s] = ci95_of_batches(freqs[s]);
    }
    out.mean_delay = sample_mean(out.delay_samples);
    out.mean_delay_ci95 = ci95_of_batches(delays);
    out.mean_edt = sample_mean(out.edt_samples);
    out.mean_edt_ci95 = iid_ci95(out.edt_samples);
    return out;
}

} // namespace slotcr
