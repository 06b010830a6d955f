#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/random.hpp"
#include "linvit/tabular.hpp"

namespace linvit {

namespace detail {

inline void require_match(const TabularMDP& mdp, const StochasticPolicy& policy, const char* who) {
    require(policy.matches(mdp), std::string(who) + ": policy dimensions do not match the MDP");
}

inline double expected_next(std::span<const double> probs, std::span<const double> next_values) {
    double total = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
        total += probs[s] * next_values[s];
    }
    return total;
}

}  // namespace detail

/// Rolls out one episode drawing actions and successors from `rng`.
inline Trajectory sample_episode(const TabularMDP& mdp, const StochasticPolicy& policy, Rng& rng) {
    detail::require_match(mdp, policy, "sample_episode");
    Trajectory traj;
    traj.steps.reserve(static_cast<std::size_t>(mdp.horizon()));
    int s = mdp.initial_state();
    for (int h = 0; h < mdp.horizon(); ++h) {
        const int a = rng.categorical(policy.row(h, s));
        const int next = rng.categorical(mdp.transition(h, s, a));
        traj.steps.push_back({h, s, a, mdp.reward(h, s, a), next});
        s = next;
    }
    return traj;
}

inline Trajectory sample_episode(const TabularMDP& mdp, const StochasticPolicy& policy, std::uint64_t seed) {
    Rng rng(seed);
    return sample_episode(mdp, policy, rng);
}

/// Q^pi by backward induction; row H is zero.
inline ActionTable policy_action_values(const TabularMDP& mdp, const StochasticPolicy& policy) {
    detail::require_match(mdp, policy, "policy_action_values");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    ActionTable Q(H + 1, S, A);
    StateTable V(H + 1, S);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double v = 0.0;
            for (int a = 0; a < A; ++a) {
                Q(h, s, a) = mdp.reward(h, s, a) + detail::expected_next(mdp.transition(h, s, a), V.row(h + 1));
                v += policy(h, s, a) * Q(h, s, a);
            }
            V(h, s) = v;
        }
    }
    return Q;
}

/// V^pi[h][s] for h = 0..H with V[H] = 0.
inline StateTable exact_policy_value(const TabularMDP& mdp, const StochasticPolicy& policy) {
    detail::require_match(mdp, policy, "exact_policy_value");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    StateTable V(H + 1, S);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double v = 0.0;
            for (int a = 0; a < A; ++a) {
                const double p = policy(h, s, a);
                if (p > 0.0) {
                    v += p * (mdp.reward(h, s, a) + detail::expected_next(mdp.transition(h, s, a), V.row(h + 1)));
                }
            }
            V(h, s) = v;
        }
    }
    return V;
}

struct OptimalSolution {
    ActionTable Q;
    StateTable V;
    /// One-hot, lowest-index argmax of Q.
    StochasticPolicy greedy;
};

inline OptimalSolution exact_optimal_value(const TabularMDP& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    ActionTable Q(H + 1, S, A);
    StateTable V(H + 1, S);
    std::vector<int> actions(static_cast<std::size_t>(H) * S);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                Q(h, s, a) = mdp.reward(h, s, a) + detail::expected_next(mdp.transition(h, s, a), V.row(h + 1));
            }
            const int best = argmax(Q.row(h, s));
            actions[static_cast<std::size_t>(h) * S + s] = best;
            V(h, s) = Q(h, s, best);
        }
    }
    return {std::move(Q), std::move(V), StochasticPolicy::deterministic(H, S, A, actions)};
}

inline OccupancyMeasure occupancy(const TabularMDP& mdp, const StochasticPolicy& policy) {
    detail::require_match(mdp, policy, "occupancy");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    StateTable d(H, S);
    d(0, mdp.initial_state()) = 1.0;
    for (int h = 0; h + 1 < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const double mass = d(h, s);
            if (mass == 0.0) {
                continue;
            }
            for (int a = 0; a < A; ++a) {
                const double w = mass * policy(h, s, a);
                if (w == 0.0) {
                    continue;
                }
                const auto next = mdp.transition(h, s, a);
                for (int sp = 0; sp < S; ++sp) {
                    d(h + 1, sp) += w * next[sp];
                }
            }
        }
    }
    return {std::move(d)};
}

/// KL(p || q) for two distributions over the same support. Terms with p = 0
/// contribute nothing; p > 0 where q = 0 raises DivergenceUndefinedError.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    detail::require(p.size() == q.size(), "kl_divergence: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            throw DivergenceUndefinedError("kl_divergence: reference has no mass where the policy does");
        }
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

/// Occupancy-weighted policy divergence
///   KL(p1 || p2) = sum_h E_{s_h ~ p1} KL(p1_h(.|s_h) || p2_h(.|s_h)).
inline double policy_kl(const TabularMDP& mdp, const StochasticPolicy& p1, const StochasticPolicy& p2) {
    detail::require_match(mdp, p1, "policy_kl");
    detail::require_match(mdp, p2, "policy_kl");
    const auto occ = occupancy(mdp, p1);
    double total = 0.0;
    for (int h = 0; h < mdp.horizon(); ++h) {
        for (int s = 0; s < mdp.num_states(); ++s) {
            const double w = occ.d(h, s);
            if (w > 0.0) {
                total += w * kl_divergence(p1.row(h, s), p2.row(h, s));
            }
        }
    }
    return total;
}

inline double policy_kl(const TabularMDP& mdp, const StochasticPolicy& p1, const PolicyPrior& prior) {
    return policy_kl(mdp, p1, prior.policy());
}

}  // namespace linvit
