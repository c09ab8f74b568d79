#include "slotcr/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slotcr/error.hpp"

namespace slotcr {

void ArrivalModel::validate() const {
    if (!(p_a >= 0.0 && p_a <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "arrival probability must lie in [0, 1]");
    }
}

void QueueConfig::validate() const {
    if (capacity < 0) throw Error(ErrorCode::InvalidParameter, "queue capacity must be nonnegative");
}

Kernel service_kernel(const RateDistribution& pi, const ArrivalModel& arrivals, const QueueConfig& cfg) {
    pi.validate();
    arrivals.validate();
    cfg.validate();

    const int k_cap = cfg.capacity;
    const double pa = arrivals.p_a;
    Kernel out = Kernel::Zero(cfg.states(), cfg.states());
    for (int n = 0; n <= k_cap; ++n) {
        for (std::size_t j = 0; j < pi.pi.size(); ++j) {
            const int after = n - std::min(static_cast<int>(j), n);
            out(n, std::min(k_cap, after)) += pi.pi[j] * (1.0 - pa);
            out(n, std::min(k_cap, after + 1)) += pi.pi[j] * pa;
        }
    }
    return out;
}

Kernel holding_kernel(const ArrivalModel& arrivals, const QueueConfig& cfg) {
    arrivals.validate();
    cfg.validate();
    const int k_cap = cfg.capacity;
    Kernel out = Kernel::Zero(cfg.states(), cfg.states());
    for (int n = 0; n < k_cap; ++n) {
        out(n, n) = 1.0 - arrivals.p_a;
        out(n, n + 1) = arrivals.p_a;
    }
    out(k_cap, k_cap) = 1.0;
    return out;
}

Eigen::VectorXd QueueSystem::queue_marginal() const {
    if (!solved()) throw Error(ErrorCode::InvalidParameter, "queue system has not been solved");
    const Eigen::Index b = block_size();
    return phi.segment(0, b) + phi.segment(b, b) + phi.segment(2 * b, b);
}

QueueSystem assemble_joint_chain(const SlotChain& chain, const Kernel& ps, const Kernel& pw, const Kernel& pc) {
    const Eigen::Index b = ps.rows();
    for (const Kernel* k : {&ps, &pw, &pc}) {
        if (k->rows() != b || k->cols() != b || b == 0) {
            throw Error(ErrorCode::DimensionMismatch, "service kernels must be square and of equal size");
        }
    }
    const Kernel* kernel_of[3] = {&ps, &pw, &pc};

    QueueSystem sys;
    sys.capacity = static_cast<int>(b - 1);
    sys.pq = Eigen::MatrixXd::Zero(3 * b, 3 * b);
    for (SlotState from : kSlotStates) {
        for (SlotState to : kSlotStates) {
            const double p = chain.p(from, to);
            if (p == 0.0) continue;
            sys.pq.block(static_cast<Eigen::Index>(index(from)) * b, static_cast<Eigen::Index>(index(to)) * b, b, b) =
                p * *kernel_of[index(from)];
        }
    }
    return sys;
}

Eigen::VectorXd solve_stationary(const QueueSystem& system, const markov::StationaryOptions& opts) {
    return markov::solve_stationary(system.pq, opts);
}

QueueSystem solved(QueueSystem system, const markov::StationaryOptions& opts) {
    system.phi = solve_stationary(system, opts);
    return system;
}

double conditional_service(const RateDistribution& pi, int k) {
    if (pi.pi.empty()) throw Error(ErrorCode::InvalidParameter, "rate distribution is empty");
    if (k < 0) throw Error(ErrorCode::InvalidParameter, "queue length must be nonnegative");
    const int n = static_cast<int>(pi.pi.size()) - 1;
    if (k == 0) return 0.0;
    double full = 0.0;
    if (k < n) {
        double tail = 0.0;
        for (int i = 1; i <= k; ++i) full += i * pi.pi[static_cast<std::size_t>(i)];
        for (int j = k + 1; j <= n; ++j) tail += pi.pi[static_cast<std::size_t>(j)];
        return full + k * tail;
    }
    for (int i = 1; i <= n; ++i) full += i * pi.pi[static_cast<std::size_t>(i)];
    return full;
}

QueueMetrics metrics(const QueueSystem& system, const SlotChain& chain, const RateDistribution& pi,
                     const ArrivalModel& arrivals) {
    if (!system.solved()) throw Error(ErrorCode::InvalidParameter, "queue system has not been solved");
    if (system.capacity < 0) throw Error(ErrorCode::InvalidParameter, "invalid capacity");
    arrivals.validate();

    const Eigen::VectorXd phi_k = system.queue_marginal();
    const double p_s = chain.stationary()[index(SlotState::S)];

    QueueMetrics m;
    m.p_drop = phi_k(system.capacity) * arrivals.p_a;
    const double still_full = phi_k(system.capacity) - system.joint(SlotState::S, system.capacity) * (1.0 - pi.pi[0]);
    m.p_drop_exact = arrivals.p_a * (system.capacity == 0 ? phi_k(0) : still_full);
    double served = 0.0;
    double served_exact = 0.0;
    for (int k = 0; k <= system.capacity; ++k) {
        const double es = conditional_service(pi, k);
        served += es * phi_k(k);
        served_exact += es * system.joint(SlotState::S, k);
        m.mean_queue += k * phi_k(k);
    }
    m.throughput = p_s * served;
    m.throughput_exact = served_exact;
    constexpr double inf = std::numeric_limits<double>::infinity();
    m.mean_delay = m.throughput > 0.0 ? m.mean_queue / m.throughput : inf;
    m.mean_delay_exact = m.throughput_exact > 0.0 ? m.mean_queue / m.throughput_exact : inf;
    return m;
}

QueueAnalysis analyze_queue(const SlotChain& chain, const RateDistribution& pi, const ArrivalModel& arrivals,
                            const QueueConfig& cfg) {
    const Kernel ps = service_kernel(pi, arrivals, cfg);
    const Kernel ph = holding_kernel(arrivals, cfg);
    QueueAnalysis out{solved(assemble_joint_chain(chain, ps, ph, ph)), {}};
    out.metrics = metrics(out.system, chain, pi, arrivals);
    return out;
}

} // namespace slotcr
