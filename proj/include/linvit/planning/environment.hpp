#pragma once

#include <concepts>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "linvit/errors.hpp"

namespace linvit::planning {

/// Named boolean conditions over states; the goal holds when all do.
template <class State>
class GoalSpec {
public:
    struct Predicate {
        std::string name;
        std::function<bool(const State&)> holds;
    };

    GoalSpec() = default;
    explicit GoalSpec(std::vector<Predicate> predicates) : predicates_(std::move(predicates)) {}

    void add(std::string name, std::function<bool(const State&)> holds) {
        predicates_.push_back({std::move(name), std::move(holds)});
    }

    const std::vector<Predicate>& predicates() const { return predicates_; }
    bool empty() const { return predicates_.empty(); }
    std::size_t size() const { return predicates_.size(); }

    std::size_t satisfied(const State& state) const {
        std::size_t n = 0;
        for (const auto& p : predicates_) {
            n += p.holds(state) ? 1 : 0;
        }
        return n;
    }

    bool reached(const State& state) const { return !empty() && satisfied(state) == size(); }

private:
    std::vector<Predicate> predicates_;
};

struct StepResult {
    double reward = 0.0;
    /// false when the action was illegal and the state was left unchanged
    bool valid = true;
};

// A deterministic, cloneable episodic environment. Steps are zero-based:
// time_step() is the index of the next action, in [0, horizon()].
// Rewards are sparse and terminal: the last action pays 1 when it leaves the
// environment in a goal state.
template <class E>
concept DeterministicEnv = std::copyable<E> && requires(E env, const E cenv, int action,
                                                        const typename E::State& state) {
    typename E::State;
    { cenv.state() } -> std::convertible_to<const typename E::State&>;
    { cenv.time_step() } -> std::convertible_to<int>;
    { cenv.horizon() } -> std::convertible_to<int>;
    { cenv.num_actions() } -> std::convertible_to<int>;
    { cenv.next_state(state, action) } -> std::convertible_to<typename E::State>;
    { cenv.reward(cenv.time_step(), state, action) } -> std::convertible_to<double>;
    { cenv.goal() } -> std::convertible_to<const GoalSpec<typename E::State>&>;
    { cenv.at_goal() } -> std::convertible_to<bool>;
    { cenv.clone() } -> std::same_as<E>;
    { env.apply(action) } -> std::same_as<StepResult>;
    env.reset();
};

/// Shared bookkeeping for environments built on a pure transition function.
/// Derived must provide next_state(state, action), is_valid(state, action)
/// and goal().
template <class Derived, class StateT>
class EnvBase {
public:
    using State = StateT;

    const State& state() const { return state_; }
    int time_step() const { return h_; }
    int horizon() const { return horizon_; }

    bool at_goal() const { return self().goal().reached(state_); }

    double reward(int h, const State& s, int action) const {
        if (h != horizon_ - 1) {
            return 0.0;
        }
        return self().goal().reached(self().next_state(s, action)) ? 1.0 : 0.0;
    }

    StepResult apply(int action) {
        if (h_ >= horizon_) {
            throw EnvironmentError("apply: episode horizon exhausted");
        }
        if (action < 0 || action >= self().num_actions()) {
            throw EnvironmentError("apply: action out of range");
        }
        StepResult result;
        result.reward = reward(h_, state_, action);
        result.valid = self().is_valid(state_, action);
        state_ = self().next_state(state_, action);
        ++h_;
        return result;
    }

    void reset() {
        state_ = initial_;
        h_ = 0;
    }

    Derived clone() const { return self(); }

    const State& initial_state() const { return initial_; }

protected:
    EnvBase(State initial, int horizon) : initial_(initial), state_(std::move(initial)), horizon_(horizon) {
        detail::require(horizon_ >= 1, "environment horizon must be at least 1");
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }

    State initial_;
    State state_;
    int horizon_;
    int h_ = 0;
};

}  // namespace linvit::planning
