#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/planning/environment.hpp"
#include "linvit/random.hpp"
#include "linvit/tabular.hpp"

// Sub-goal search: the horizon is cut into H/N windows. In each window a
// breadth-k tree of depth N is expanded over the prior's top-k actions, each
// branch on its own clone of the environment, and the action sequence
// maximizing
//
//     V̂(window end state) + sum over the window of lambda * prior(a_h | s_h)
//
// is executed on the real environment.

namespace linvit::planning {

/// A prior over actions for a planning environment: prior(h, state) returns a
/// probability vector of length num_actions.
template <class P, class State>
concept ActionPrior = requires(const P& prior, int h, const State& state) {
    { prior(h, state) } -> std::convertible_to<std::vector<double>>;
};

/// Adapts a tabular PolicyPrior to integer-state environments.
struct TabularActionPrior {
    const PolicyPrior* prior;

    std::vector<double> operator()(int h, int s) const {
        const auto row = prior->row(h, s);
        return {row.begin(), row.end()};
    }
};

enum class EstimatorKind { rule_based, monte_carlo };

inline std::string_view to_string(EstimatorKind kind) {
    return kind == EstimatorKind::rule_based ? "rule-based" : "monte-carlo";
}

inline EstimatorKind parse_estimator_kind(std::string_view name) {
    if (name == "rule-based") {
        return EstimatorKind::rule_based;
    }
    if (name == "monte-carlo") {
        return EstimatorKind::monte_carlo;
    }
    throw ConfigurationError("unknown estimator '" + std::string(name) + "'");
}

struct SearchConfig {
    /// Window (sub-problem) length.
    int N = 1;
    /// Breadth: actions expanded per node.
    int k = 1;
    double lambda = 1.0;
    /// Monte-Carlo rollouts per evaluated state.
    int M = 1;
    EstimatorKind estimator = EstimatorKind::rule_based;

    void validate(int horizon, int num_actions) const {
        detail::require(N >= 1, "SearchConfig: N must be at least 1");
        detail::require(horizon % N == 0, "SearchConfig: N must divide the horizon");
        detail::require(k >= 1 && k <= num_actions, "SearchConfig: k must lie in [1, A]");
        detail::require(lambda >= 0.0, "SearchConfig: lambda must be nonnegative");
        detail::require(M >= 1, "SearchConfig: M must be at least 1");
    }
};

/// Fraction of goal predicates that hold in `state`.
template <class State>
double rule_value(const State& state, const GoalSpec<State>& goal) {
    detail::require(!goal.empty(), "rule_value: goal has no predicates");
    return static_cast<double>(goal.satisfied(state)) / static_cast<double>(goal.size());
}

/// The k most probable actions, descending, ties to the lower index.
inline std::vector<int> top_k_actions(std::span<const double> probs, int k) {
    detail::require(k >= 1 && static_cast<std::size_t>(k) <= probs.size(), "top_k_actions: k must lie in [1, A]");
    std::vector<int> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return probs[a] > probs[b]; });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

template <class State, ActionPrior<State> Prior>
std::vector<int> top_k_actions(const Prior& prior, int h, const State& state, int k) {
    const std::vector<double> probs = prior(h, state);
    return top_k_actions(probs, k);
}

/// Mean return-to-go of M prior-driven rollouts from the environment's
/// current state and step. Each rollout runs on its own clone; every
/// environment transition is added to `samples`.
template <DeterministicEnv Env, ActionPrior<typename Env::State> Prior>
double mc_value(const Env& env, const Prior& prior, int M, std::uint64_t seed, std::uint64_t* samples = nullptr) {
    detail::require(M >= 1, "mc_value: M must be at least 1");
    double total = 0.0;
    for (int m = 0; m < M; ++m) {
        Env rollout = env.clone();
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
        double ret = 0.0;
        while (rollout.time_step() < rollout.horizon()) {
            const std::vector<double> probs = prior(rollout.time_step(), rollout.state());
            ret += rollout.apply(rng.categorical(probs)).reward;
            if (samples) {
                ++*samples;
            }
        }
        total += ret;
    }
    return total / static_cast<double>(M);
}

/// Rule-based leaf value: the fraction of satisfied goal predicates.
struct RuleValueEstimator {
    template <DeterministicEnv Env>
    double operator()(const Env& leaf, double /*window_reward*/, std::uint64_t /*seed*/,
                      std::uint64_t& /*samples*/) const {
        return rule_value(leaf.state(), leaf.goal());
    }
};

/// Monte-Carlo leaf value. Rewards collected inside the window are added to
/// the rollout estimate, so the last window of a sparse terminal-reward task
/// still sees its payoff.
template <class Prior>
struct MonteCarloEstimator {
    const Prior* prior;
    int M = 1;

    template <DeterministicEnv Env>
    double operator()(const Env& leaf, double window_reward, std::uint64_t seed, std::uint64_t& samples) const {
        return window_reward + mc_value(leaf, *prior, M, seed, &samples);
    }
};

/// Seed handed to the estimator for the leaf reached by `actions` in window i.
inline std::uint64_t leaf_seed(std::uint64_t seed, int window, std::span<const int> actions) {
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(window));
    for (int a : actions) {
        s = derive_seed(s, static_cast<std::uint64_t>(a) + 1);
    }
    return s;
}

struct SearchResult {
    std::vector<int> actions;
    double score = 0.0;
    /// Clone transitions plus estimator rollouts.
    std::uint64_t samples = 0;
};

/// Breadth-k, depth-N lookahead for window `window` from the environment's
/// current state. The environment itself is not modified.
template <DeterministicEnv Env, ActionPrior<typename Env::State> Prior, class Estimator>
SearchResult bfs_subgoal_search(const Env& env, const Prior& prior, const Estimator& estimator,
                                const SearchConfig& config, int window, std::uint64_t seed) {
    config.validate(env.horizon(), env.num_actions());
    detail::require(env.time_step() + config.N <= env.horizon(), "bfs_subgoal_search: window exceeds the horizon");

    struct Node {
        Env env;
        std::vector<int> actions;
        double prior_term = 0.0;
        double window_reward = 0.0;
    };

    SearchResult result;
    std::vector<Node> frontier;
    frontier.push_back({env.clone(), {}, 0.0, 0.0});
    for (int depth = 0; depth < config.N; ++depth) {
        std::vector<Node> next;
        next.reserve(frontier.size() * static_cast<std::size_t>(config.k));
        for (const auto& node : frontier) {
            const std::vector<double> probs = prior(node.env.time_step(), node.env.state());
            detail::require(probs.size() == static_cast<std::size_t>(env.num_actions()),
                            "bfs_subgoal_search: prior row has the wrong length");
            for (int a : top_k_actions(probs, config.k)) {
                Node child{node.env.clone(), node.actions, node.prior_term, node.window_reward};
                child.window_reward += child.env.apply(a).reward;
                child.prior_term += config.lambda * probs[a];
                child.actions.push_back(a);
                ++result.samples;
                next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }

    bool have_best = false;
    for (const auto& leaf : frontier) {
        const double value =
            estimator(leaf.env, leaf.window_reward, leaf_seed(seed, window, leaf.actions), result.samples);
        const double score = value + leaf.prior_term;
        if (!have_best || score > result.score || (score == result.score && leaf.actions < result.actions)) {
            result.score = score;
            result.actions = leaf.actions;
            have_best = true;
        }
    }
    return result;
}

struct ExecutedStep {
    int h;
    int action;
    double reward;
    bool valid;
};

struct SlinvitResult {
    bool success = false;
    std::vector<ExecutedStep> trajectory;
    /// Every environment transition: search clones, rollouts and real steps.
    std::uint64_t samples_used = 0;

    double total_reward() const {
        double r = 0.0;
        for (const auto& step : trajectory) {
            r += step.reward;
        }
        return r;
    }
};

/// Runs all H/N windows on `env` (which is reset first) and reports whether
/// the goal holds at the end of the horizon.
template <DeterministicEnv Env, ActionPrior<typename Env::State> Prior>
SlinvitResult run_slinvit(Env env, const Prior& prior, const SearchConfig& config, std::uint64_t seed) {
    env.reset();
    config.validate(env.horizon(), env.num_actions());
    SlinvitResult result;
    const int windows = env.horizon() / config.N;
    for (int i = 0; i < windows; ++i) {
        SearchResult found;
        if (config.estimator == EstimatorKind::rule_based) {
            found = bfs_subgoal_search(env, prior, RuleValueEstimator{}, config, i, seed);
        } else {
            found = bfs_subgoal_search(env, prior, MonteCarloEstimator<Prior>{&prior, config.M}, config, i, seed);
        }
        result.samples_used += found.samples;
        for (int a : found.actions) {
            const int h = env.time_step();
            const auto step = env.apply(a);
            result.trajectory.push_back({h, a, step.reward, step.valid});
            ++result.samples_used;
        }
    }
    result.success = env.at_goal();
    return result;
}

/// Baseline: execute the prior's most probable action at every step.
template <DeterministicEnv Env, ActionPrior<typename Env::State> Prior>
SlinvitResult run_greedy_prior(Env env, const Prior& prior) {
    env.reset();
    SlinvitResult result;
    while (env.time_step() < env.horizon()) {
        const int h = env.time_step();
        const std::vector<double> probs = prior(h, env.state());
        const int a = argmax(probs);
        const auto step = env.apply(a);
        result.trajectory.push_back({h, a, step.reward, step.valid});
        ++result.samples_used;
    }
    result.success = env.at_goal();
    return result;
}

}  // namespace linvit::planning
