#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "linvit/dynamic_programming.hpp"
#include "linvit/errors.hpp"
#include "linvit/tabular.hpp"

// KL-regularized backups. For a row of action values q and a reference
// distribution prior, the regularized value is
//
//     f*(q) = max_pi  <pi, q> - lambda * KL(pi || prior)
//           = lambda * log sum_a prior(a) exp(q(a) / lambda)
//
// attained by pi(a) ∝ prior(a) exp(q(a) / lambda). lambda = 0 is the greedy
// limit (max_a q, one-hot argmax); lambda = +inf means "follow the prior".

namespace linvit {

inline constexpr double kFollowPrior = std::numeric_limits<double>::infinity();

/// lambda as a fixed coefficient or derived from (epsilon, epsilon_llm) as
/// lambda = epsilon / (2 * epsilon_llm).
struct RegularizationConfig {
    double lambda = 0.0;
    bool use_schedule = false;

    /// epsilon_llm = 0 yields kFollowPrior.
    static double scheduled_lambda(double epsilon, double epsilon_llm) {
        detail::require(epsilon > 0.0, "scheduled_lambda: epsilon must be positive");
        detail::require(epsilon_llm >= 0.0, "scheduled_lambda: epsilon_llm must be nonnegative");
        if (epsilon_llm == 0.0) {
            return kFollowPrior;
        }
        return epsilon / (2.0 * epsilon_llm);
    }

    double resolve(double epsilon, double epsilon_llm) const {
        if (use_schedule) {
            return scheduled_lambda(epsilon, epsilon_llm);
        }
        detail::require(lambda >= 0.0, "RegularizationConfig: lambda must be nonnegative");
        return lambda;
    }
};

namespace detail {

inline void require_lambda(double lambda) {
    require(lambda >= 0.0, "regularization coefficient lambda must be nonnegative");
}

inline double max_over_support(std::span<const double> q, std::span<const double> prior) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (prior[a] > 0.0 && q[a] > m) {
            m = q[a];
        }
    }
    return m;
}

}  // namespace detail

inline double softmax_value(std::span<const double> q, std::span<const double> prior, double lambda) {
    detail::require_lambda(lambda);
    detail::require(q.size() == prior.size() && !q.empty(), "softmax_value: size mismatch");
    if (lambda == 0.0) {
        return q[argmax(q)];
    }
    if (std::isinf(lambda)) {
        double v = 0.0;
        for (std::size_t a = 0; a < q.size(); ++a) {
            v += prior[a] * q[a];
        }
        return v;
    }
    const double m = detail::max_over_support(q, prior);
    double z = 0.0;
    double mean = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (prior[a] > 0.0) {
            z += prior[a] * std::exp((q[a] - m) / lambda);
            mean += prior[a] * q[a];
        }
    }
    // The exact value lies in [E_prior q, max q]; rounding in z can leave it.
    return std::min(m, std::max(mean, m + lambda * std::log(z)));
}

/// Writes the maximizer pi(a) ∝ prior(a) exp(q(a)/lambda) into `out`.
inline void softmax_policy(std::span<const double> q, std::span<const double> prior, double lambda,
                           std::span<double> out) {
    detail::require_lambda(lambda);
    detail::require(q.size() == prior.size() && q.size() == out.size() && !q.empty(),
                    "softmax_policy: size mismatch");
    if (lambda == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        out[argmax(q)] = 1.0;
        return;
    }
    if (std::isinf(lambda)) {
        std::copy(prior.begin(), prior.end(), out.begin());
        return;
    }
    const double m = detail::max_over_support(q, prior);
    double z = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        out[a] = prior[a] > 0.0 ? prior[a] * std::exp((q[a] - m) / lambda) : 0.0;
        z += out[a];
    }
    for (double& p : out) {
        p /= z;
    }
}

inline std::vector<double> softmax_policy(std::span<const double> q, std::span<const double> prior,
                                          double lambda) {
    std::vector<double> out(q.size());
    softmax_policy(q, prior, lambda, out);
    return out;
}

/// <pi, q> - lambda * KL(pi || prior).
inline double regularized_objective(std::span<const double> pi, std::span<const double> q,
                                    std::span<const double> prior, double lambda) {
    double v = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        v += pi[a] * q[a];
    }
    if (lambda == 0.0) {
        return v;
    }
    return v - lambda * kl_divergence(pi, prior);
}

/// Q/V of the prior-regularized MDP, h = 0..H with row H zero.
struct RegularizedValueTables {
    ActionTable Q;
    StateTable V;
};

struct RegularizedSolution {
    RegularizedValueTables tables;
    StochasticPolicy policy;
};

/// max_pi V^pi_{prior,lambda} under the true transitions.
inline RegularizedSolution regularized_optimal_value(const TabularMDP& mdp, const PolicyPrior& prior,
                                                     double lambda) {
    detail::require_lambda(lambda);
    detail::require(prior.matches(mdp), "regularized_optimal_value: prior dimensions do not match the MDP");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    ActionTable Q(H + 1, S, A);
    StateTable V(H + 1, S);
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                Q(h, s, a) = mdp.reward(h, s, a) + detail::expected_next(mdp.transition(h, s, a), V.row(h + 1));
            }
            V(h, s) = softmax_value(Q.row(h, s), prior.row(h, s), lambda);
            softmax_policy(Q.row(h, s), prior.row(h, s), lambda,
                           std::span<double>(probs.data() + (static_cast<std::size_t>(h) * S + s) * A,
                                             static_cast<std::size_t>(A)));
        }
    }
    return {{std::move(Q), std::move(V)}, StochasticPolicy(H, S, A, std::move(probs))};
}

/// V^pi_{prior,lambda}: expected return minus lambda times the per-step KL to
/// the prior, accumulated along the policy's own state distribution.
inline StateTable regularized_policy_value(const TabularMDP& mdp, const PolicyPrior& prior,
                                           const StochasticPolicy& policy, double lambda) {
    detail::require_lambda(lambda);
    detail::require_match(mdp, policy, "regularized_policy_value");
    detail::require(prior.matches(mdp), "regularized_policy_value: prior dimensions do not match the MDP");
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
            const double kl = kl_divergence(policy.row(h, s), prior.row(h, s));
            // avoids 0 * inf for an infinite lambda
            V(h, s) = (lambda == 0.0 || kl == 0.0) ? v : v - lambda * kl;
        }
    }
    return V;
}

}  // namespace linvit
