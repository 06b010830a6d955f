#pragma once

#include <memory>
#include <span>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/planning/environment.hpp"
#include "linvit/tabular.hpp"

namespace linvit::planning {

/// A deterministic TabularMDP (one-hot transitions) exposed through the
/// environment contract. Rewards are the MDP's own dense rewards; the goal
/// is reaching `goal_state`.
class TabularEnv {
public:
    using State = int;

    TabularEnv(std::shared_ptr<const TabularMDP> mdp, int goal_state)
        : mdp_(std::move(mdp)), state_(mdp_ ? mdp_->initial_state() : 0) {
        detail::require(mdp_ != nullptr, "TabularEnv: null MDP");
        detail::require(mdp_->is_deterministic(), "TabularEnv: transitions must be one-hot");
        detail::require(goal_state >= 0 && goal_state < mdp_->num_states(), "TabularEnv: goal state out of range");
        GoalSpec<int> goal;
        goal.add("state = " + std::to_string(goal_state), [goal_state](int s) { return s == goal_state; });
        goal_ = std::make_shared<const GoalSpec<int>>(std::move(goal));
    }

    explicit TabularEnv(const TabularMDP& mdp, int goal_state = 0)
        : TabularEnv(std::make_shared<const TabularMDP>(mdp), goal_state) {}

    const int& state() const { return state_; }
    int time_step() const { return h_; }
    int horizon() const { return mdp_->horizon(); }
    int num_actions() const { return mdp_->num_actions(); }

    int next_state(int s, int action) const {
        return argmax(mdp_->transition(std::min(h_, horizon() - 1), s, action));
    }

    double reward(int h, int s, int action) const { return mdp_->reward(h, s, action); }

    const GoalSpec<int>& goal() const { return *goal_; }
    bool at_goal() const { return goal_->reached(state_); }

    StepResult apply(int action) {
        if (h_ >= horizon()) {
            throw EnvironmentError("apply: episode horizon exhausted");
        }
        if (action < 0 || action >= num_actions()) {
            throw EnvironmentError("apply: action out of range");
        }
        StepResult result{mdp_->reward(h_, state_, action), true};
        state_ = argmax(mdp_->transition(h_, state_, action));
        ++h_;
        return result;
    }

    void reset() {
        state_ = mdp_->initial_state();
        h_ = 0;
    }

    TabularEnv clone() const { return *this; }

    const TabularMDP& mdp() const { return *mdp_; }

private:
    std::shared_ptr<const TabularMDP> mdp_;
    std::shared_ptr<const GoalSpec<int>> goal_;
    int state_ = 0;
    int h_ = 0;
};

static_assert(DeterministicEnv<TabularEnv>);

}  // namespace linvit::planning
