#include "slotcr/primary_chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slotcr/error.hpp"
#include "slotcr/stationary.hpp"

namespace slotcr {

namespace {

constexpr double kDegenerateDenominator = 1e-14;

void require_positive_finite(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw Error(ErrorCode::InvalidParameter,
                    std::string(name) + " must be positive and finite, got " + std::to_string(v));
    }
}

void require_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability,
                    std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

} // namespace

std::string_view to_string(SlotState s) {
    switch (s) {
    case SlotState::S: return "S";
    case SlotState::W: return "W";
    case SlotState::C: return "C";
    }
    return "?";
}

void PrimaryTrafficModel::validate() const {
    require_positive_finite(lambda, "lambda");
    require_positive_finite(mu, "mu");
}

void SensingConfig::validate() const { require_positive_finite(ts, "ts"); }

SlotChain::SlotChain(double beta_on, double beta_off, const Matrix3& transition,
                     std::optional<Vector3> stationary)
    : beta_on_(beta_on), beta_off_(beta_off), transition_(transition),
      stationary_(std::move(stationary)) {}

Matrix3 SlotChain::column_conditioned() const {
    Matrix3 out{};
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) out[b][a] = transition_[a][b];
    }
    return out;
}

const Vector3& SlotChain::stationary() const {
    if (!stationary_) {
        throw Error(ErrorCode::DegenerateChain,
                    "beta_on = beta_off = 1 leaves the slot chain without a unique stationary vector");
    }
    return *stationary_;
}

PersistenceProbs beta_probs(const PrimaryTrafficModel& model, const SensingConfig& cfg) {
    model.validate();
    cfg.validate();
    return {std::exp(-cfg.ts / model.lambda), std::exp(-cfg.ts / model.mu)};
}

SlotChain build_slot_chain(double beta_on, double beta_off) {
    require_probability(beta_on, "beta_on");
    require_probability(beta_off, "beta_off");

    const auto S = index(SlotState::S);
    const auto W = index(SlotState::W);
    const auto C = index(SlotState::C);

    Matrix3 t{};
    t[S][S] = beta_off;
    t[S][C] = 1.0 - beta_off;
    t[W][S] = (1.0 - beta_on) * beta_off;
    t[W][W] = beta_on;
    t[W][C] = (1.0 - beta_on) * (1.0 - beta_off);
    t[C][W] = 1.0;

    std::optional<Vector3> stationary;
    const double a = 1.0 - beta_on;
    const double b = 1.0 - beta_off;
    const double denom = a + b;
    if (denom > kDegenerateDenominator) {
        Vector3 pi{};
        pi[S] = a * beta_off / denom;
        pi[W] = b / denom;
        pi[C] = a * b / denom;
        stationary = pi;
    }
    return SlotChain(beta_on, beta_off, t, stationary);
}

SlotChain build_slot_chain(const PrimaryTrafficModel& model, const SensingConfig& cfg) {
    const auto beta = beta_probs(model, cfg);
    return build_slot_chain(beta.beta_on, beta.beta_off);
}

Vector3 stationary_distribution(const SlotChain& chain) { return chain.stationary(); }

Vector3 stationary_distribution_numeric(const SlotChain& chain) {
    Eigen::MatrixXd p(3, 3);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) p(a, b) = chain.transition()[a][b];
    }
    const Eigen::VectorXd pi = markov::solve_stationary(p);
    return {pi(0), pi(1), pi(2)};
}

double collision_probability(const PrimaryTrafficModel& model, const SensingConfig& cfg) {
    return stationary_distribution(build_slot_chain(model, cfg))[index(SlotState::C)];
}

bool small_period_assumption_holds(const PrimaryTrafficModel& model, const SensingConfig& cfg) {
    model.validate();
    cfg.validate();
    return cfg.ts <= 0.5 * std::min(model.lambda, model.mu);
}

} // namespace slotcr
