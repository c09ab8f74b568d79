#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace slotcr {

/// Service state of one sensing slot.
///   S: sensed free, PU still idle at the next sensing instant (clean transmission)
///   W: sensed busy, the SU waits
///   C: sensed free, PU busy at the next sensing instant (collision)
enum class SlotState : int { S = 0, W = 1, C = 2 };

inline constexpr std::array<SlotState, 3> kSlotStates{SlotState::S, SlotState::W, SlotState::C};

constexpr std::size_t index(SlotState s) { return static_cast<std::size_t>(s); }
std::string_view to_string(SlotState s);

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

/// Mean busy (lambda) and idle (mu) sojourn of the primary user, in seconds.
struct PrimaryTrafficModel {
    double lambda = 0.0;
    double mu = 0.0;

    void validate() const;
};

struct SensingConfig {
    double ts = 0.0; ///< sensing period = slot length, seconds

    void validate() const;
};

/// Probability that the sensed PU state persists across one sensing period.
struct PersistenceProbs {
    double beta_on = 0.0;
    double beta_off = 0.0;
};

/**
 * Three-state {S, W, C} slot chain.
 *
 * Stored row-stochastic: transition()[a][b] = Pr[next = b | current = a].
 * The column-conditioned layout that lists p_{b|a} at (b, a) is available
 * through column_conditioned() and is exactly the transpose.
 */
class SlotChain {
  public:
    SlotChain(double beta_on, double beta_off, const Matrix3& transition,
              std::optional<Vector3> stationary);

    double beta_on() const noexcept { return beta_on_; }
    double beta_off() const noexcept { return beta_off_; }

    const Matrix3& transition() const noexcept { return transition_; }
    double p(SlotState from, SlotState to) const { return transition_[index(from)][index(to)]; }
    Matrix3 column_conditioned() const;

    double p_ss() const { return p(SlotState::S, SlotState::S); }
    double p_cs() const { return p(SlotState::S, SlotState::C); }
    double p_sw() const { return p(SlotState::W, SlotState::S); }
    double p_ww() const { return p(SlotState::W, SlotState::W); }
    double p_cw() const { return p(SlotState::W, SlotState::C); }

    bool has_stationary() const noexcept { return stationary_.has_value(); }
    /// Throws Error(DegenerateChain) when beta_on = beta_off = 1.
    const Vector3& stationary() const;

  private:
    double beta_on_;
    double beta_off_;
    Matrix3 transition_;
    std::optional<Vector3> stationary_;
};

/// (e^{-Ts/lambda}, e^{-Ts/mu}).
PersistenceProbs beta_probs(const PrimaryTrafficModel& model, const SensingConfig& cfg);

SlotChain build_slot_chain(double beta_on, double beta_off);
SlotChain build_slot_chain(const PrimaryTrafficModel& model, const SensingConfig& cfg);

/// Closed form ((1-b_on) b_off, 1-b_off, (1-b_on)(1-b_off)) / (2-b_on-b_off).
Vector3 stationary_distribution(const SlotChain& chain);

/// Numerical fixed point of the 3x3 matrix through the generic solver.
Vector3 stationary_distribution_numeric(const SlotChain& chain);

double collision_probability(const PrimaryTrafficModel& model, const SensingConfig& cfg);

/// False when Ts > min(lambda, mu)/2: two PU switches inside one period are
/// no longer negligible and the slot chain is only approximate.
bool small_period_assumption_holds(const PrimaryTrafficModel& model, const SensingConfig& cfg);

} // namespace slotcr
