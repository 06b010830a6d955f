#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "linvit/dynamic_programming.hpp"
#include "linvit/errors.hpp"
#include "linvit/tabular.hpp"

// Synthetic priors with a controllable distance from the optimal policy.
// The reference optimum is always the canonical lowest-index greedy policy.

namespace linvit {

enum class PriorKind {
    contaminated,  ///< alpha * greedy optimum + (1 - alpha) * uniform
    softened,      ///< ∝ exp(Q* / temperature)
    uniform,
    adversarial,   ///< one-hot on the worst action other than the optimum
    scripted,      ///< domain heuristic; planning environments only
};

inline std::string_view to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::contaminated: return "contaminated";
        case PriorKind::softened: return "softened";
        case PriorKind::uniform: return "uniform";
        case PriorKind::adversarial: return "adversarial";
        case PriorKind::scripted: return "scripted";
    }
    return "unknown";
}

inline PriorKind parse_prior_kind(std::string_view name) {
    for (auto kind : {PriorKind::contaminated, PriorKind::softened, PriorKind::uniform, PriorKind::adversarial,
                      PriorKind::scripted}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigurationError("unknown prior kind '" + std::string(name) + "'");
}

struct PriorSpec {
    PriorKind kind = PriorKind::contaminated;
    double alpha = 1.0;
    double temperature = 1.0;
    double floor = kDefaultPriorFloor;
    /// scripted planning priors: weight on the heuristic vs. uniform noise
    double quality = 1.0;
};

struct BuiltPrior {
    PolicyPrior prior;
    /// KL(greedy optimum || prior), finite thanks to flooring.
    double epsilon_llm;
};

inline BuiltPrior build_prior(const TabularMDP& mdp, const PriorSpec& spec) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    const auto optimum = exact_optimal_value(mdp);
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
    auto row = [&](int h, int s) { return probs.data() + (static_cast<std::size_t>(h) * S + s) * A; };

    switch (spec.kind) {
        case PriorKind::contaminated: {
            detail::require(spec.alpha >= 0.0 && spec.alpha <= 1.0, "build_prior: alpha must lie in [0,1]");
            for (int h = 0; h < H; ++h) {
                for (int s = 0; s < S; ++s) {
                    double* p = row(h, s);
                    double total = 0.0;
                    for (int a = 0; a < A; ++a) {
                        p[a] = spec.alpha * optimum.greedy(h, s, a) + (1.0 - spec.alpha) / A;
                        total += p[a];
                    }
                    for (int a = 0; a < A; ++a) {
                        p[a] /= total;
                    }
                }
            }
            break;
        }
        case PriorKind::softened: {
            detail::require(spec.temperature > 0.0, "build_prior: temperature must be positive");
            for (int h = 0; h < H; ++h) {
                for (int s = 0; s < S; ++s) {
                    double* p = row(h, s);
                    const auto q = optimum.Q.row(h, s);
                    const double m = q[argmax(q)];
                    double total = 0.0;
                    for (int a = 0; a < A; ++a) {
                        p[a] = std::exp((q[a] - m) / spec.temperature);
                        total += p[a];
                    }
                    for (int a = 0; a < A; ++a) {
                        p[a] /= total;
                    }
                }
            }
            break;
        }
        case PriorKind::uniform:
            std::fill(probs.begin(), probs.end(), 1.0 / A);
            break;
        case PriorKind::adversarial: {
            detail::require(A >= 2, "build_prior: an adversarial prior needs at least two actions");
            for (int h = 0; h < H; ++h) {
                for (int s = 0; s < S; ++s) {
                    const auto q = optimum.Q.row(h, s);
                    const int best = argmax(q);
                    int worst = best == 0 ? 1 : 0;
                    for (int a = 0; a < A; ++a) {
                        if (a != best && q[a] < q[worst]) {
                            worst = a;
                        }
                    }
                    row(h, s)[worst] = 1.0;
                }
            }
            break;
        }
        case PriorKind::scripted:
            throw ConfigurationError("build_prior: scripted priors apply to planning environments only");
    }

    PolicyPrior prior(H, S, A, std::move(probs), spec.floor);
    const double eps = policy_kl(mdp, optimum.greedy, prior);
    return {std::move(prior), eps};
}

}  // namespace linvit
