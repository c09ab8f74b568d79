#pragma once

#include <Eigen/Dense>

#include "slotcr/modulation.hpp"
#include "slotcr/primary_chain.hpp"
#include "slotcr/stationary.hpp"

namespace slotcr {

/// Bernoulli arrivals: at most one packet per slot, with probability p_a.
struct ArrivalModel {
    double p_a = 0.0;

    void validate() const;
};

/// FIFO buffer with K waiting positions; queue length ranges over 0..K.
struct QueueConfig {
    int capacity = 1;

    void validate() const;
    Eigen::Index states() const { return capacity + 1; }
};

/// (K+1)x(K+1) queue-length kernel, row convention: (n, m) = Pr[L_next = m | L = n].
using Kernel = Eigen::MatrixXd;

/// Kernel of a clean transmission slot. Entry (n, m) = Pr[min(K, n - min(J, n) + A) = m]
/// with departures J ~ pi (rate index) and arrival A ~ Bernoulli(p_a).
Kernel service_kernel(const RateDistribution& pi, const ArrivalModel& arrivals, const QueueConfig& cfg);

/// Kernel of a waiting or collision slot: arrivals only, saturating at K.
Kernel holding_kernel(const ArrivalModel& arrivals, const QueueConfig& cfg);

/**
 * Joint (service state, queue length) chain.
 *
 * States are ordered in blocks (S, 0..K), (W, 0..K), (C, 0..K). Row convention:
 * block (D, D') of pq is Pr[D' | D] times the kernel of D, because the queue
 * update is driven by the service state of the previous slot.
 */
struct QueueSystem {
    int capacity = 0;
    Eigen::MatrixXd pq;
    Eigen::VectorXd phi; ///< empty until solved

    bool solved() const { return phi.size() == pq.rows() && phi.size() > 0; }
    Eigen::Index block_size() const { return capacity + 1; }
    Eigen::Index state_index(SlotState d, int k) const {
        return static_cast<Eigen::Index>(index(d)) * block_size() + k;
    }
    double joint(SlotState d, int k) const { return phi(state_index(d, k)); }
    /// phi_k = sum over D of phi_{D,k}.
    Eigen::VectorXd queue_marginal() const;
};

QueueSystem assemble_joint_chain(const SlotChain& chain, const Kernel& ps, const Kernel& pw, const Kernel& pc);

Eigen::VectorXd solve_stationary(const QueueSystem& system, const markov::StationaryOptions& opts = {});

/// Copy of system with phi filled in.
QueueSystem solved(QueueSystem system, const markov::StationaryOptions& opts = {});

/// Mean packets delivered by one clean slot with k packets queued (piecewise form).
double conditional_service(const RateDistribution& pi, int k);

struct QueueMetrics {
    /// phi_K * p_a: drops per slot, counting every slot that starts with a full buffer.
    double p_drop = 0.0;
    /// p_S * sum_k E[S|k] phi_k: treats service state and queue length as independent.
    double throughput = 0.0;
    double mean_queue = 0.0;
    /// mean_queue / throughput in slots; +inf when throughput is zero.
    double mean_delay = 0.0;
    /// sum_k E[S|k] phi_{S,k}: exact long-run departures per slot of the joint chain.
    double throughput_exact = 0.0;
    double mean_delay_exact = 0.0;
    /// p_a * Pr[buffer still full after service]: exact drops per slot.
    double p_drop_exact = 0.0;
};

QueueMetrics metrics(const QueueSystem& system, const SlotChain& chain, const RateDistribution& pi,
                     const ArrivalModel& arrivals);

/// Kernels, assembly, solve and metrics in one call.
struct QueueAnalysis {
    QueueSystem system;
    QueueMetrics metrics;
};

QueueAnalysis analyze_queue(const SlotChain& chain, const RateDistribution& pi, const ArrivalModel& arrivals,
                            const QueueConfig& cfg);

} // namespace slotcr
