#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/planning/blocksworld.hpp"
#include "linvit/planning/gridworld.hpp"
#include "linvit/random.hpp"
#include "linvit/tabular.hpp"

// Hand-written action rankers standing in for a language-model prior. Each
// row is
//
//     quality * softmax(score + noise) + (1 - quality) * uniform over legal actions
//
// where score is a domain heuristic and noise is a deterministic per-(h, state)
// perturbation of amplitude (1 - quality) * kNoiseAmplitude. Illegal actions
// only receive the floor mass.

namespace linvit::planning {

namespace scripted_detail {

inline constexpr double kNoiseAmplitude = 16.0;

inline std::vector<double> blend_scores(const std::vector<double>& score, const std::vector<bool>& legal,
                                        double quality, double floor, std::uint64_t noise_seed) {
    const std::size_t A = score.size();
    std::vector<double> row(A, 0.0);
    std::size_t n_legal = 0;
    for (bool l : legal) {
        n_legal += l ? 1 : 0;
    }
    if (n_legal == 0) {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(A));
        return row;
    }
    Rng noise(noise_seed);
    std::vector<double> perturbed(A, 0.0);
    double top = -1e300;
    for (std::size_t a = 0; a < A; ++a) {
        const double eps = noise.uniform();
        if (legal[a]) {
            perturbed[a] = score[a] + (1.0 - quality) * kNoiseAmplitude * eps;
            top = std::max(top, perturbed[a]);
        }
    }
    double z = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
        if (legal[a]) {
            perturbed[a] = std::exp(perturbed[a] - top);
            z += perturbed[a];
        }
    }
    for (std::size_t a = 0; a < A; ++a) {
        if (legal[a]) {
            row[a] = quality * perturbed[a] / z + (1.0 - quality) / static_cast<double>(n_legal);
        }
    }
    floor_row(row, floor);
    return row;
}

}  // namespace scripted_detail

/// Scripted blocks-world prior. Heuristic preferences, strongest first:
/// stack the held block onto its goal support; lift a block whose goal
/// support is clear; clear away blocks sitting above misplaced or goal-target
/// blocks; set the held block down. Undoing a satisfied arrangement scores lowest.
class ScriptedBlocksPrior {
public:
    ScriptedBlocksPrior(const BlocksWorld& env, double quality, std::uint64_t seed = 0,
                        double floor = kDefaultPriorFloor)
        : blocks_(env.blocks()), target_(static_cast<std::size_t>(env.blocks()), -1), quality_(quality),
          seed_(seed), floor_(floor) {
        linvit::detail::require(quality >= 0.0 && quality <= 1.0, "ScriptedBlocksPrior: quality must lie in [0,1]");
        for (const auto& [x, y] : env.arrangements()) {
            target_[x] = y;
        }
    }

    std::vector<double> operator()(int h, const BlocksState& s) const {
        const int A = kBlockVerbs * blocks_;
        std::vector<double> score(static_cast<std::size_t>(A), 0.0);
        std::vector<bool> legal(static_cast<std::size_t>(A), false);
        for (int a = 0; a < A; ++a) {
            legal[a] = blocks_action_valid(s, a);
            if (legal[a]) {
                score[a] = heuristic(s, a);
            }
        }
        return scripted_detail::blend_scores(score, legal, quality_, floor_, noise_seed(h, s));
    }

    /// Raw heuristic score of a legal action.
    double heuristic(const BlocksState& s, int action) const {
        const auto [verb, b] = decode_blocks_action(action, blocks_);
        switch (verb) {
            case BlockVerb::stack:
                return target_[s.held] == b ? 10.0 : 0.0;
            case BlockVerb::put:
                return 3.0;
            case BlockVerb::pickup:
            case BlockVerb::unstack: {
                if (target_[b] >= 0 && s.on[b] == target_[b]) {
                    return 0.0;
                }
                if (target_[b] >= 0 && s.clear(target_[b])) {
                    return 8.0;
                }
                if (verb == BlockVerb::unstack && covers_pending_block(s, b)) {
                    return 6.0;
                }
                return 1.0;
            }
        }
        return 0.0;
    }

private:
    bool misplaced(const BlocksState& s, int b) const { return target_[b] >= 0 && s.on[b] != target_[b]; }

    bool awaited(const BlocksState& s, int b) const {
        for (int x = 0; x < blocks_; ++x) {
            if (target_[x] == b && s.on[x] != b) {
                return true;
            }
        }
        return false;
    }

    /// True when some block below b is misplaced or waiting for a block on top.
    bool covers_pending_block(const BlocksState& s, int b) const {
        for (int below = s.on[b]; below >= 0; below = s.on[below]) {
            if (misplaced(s, below) || awaited(s, below)) {
                return true;
            }
        }
        return false;
    }

    std::uint64_t noise_seed(int h, const BlocksState& s) const {
        std::uint64_t x = derive_seed(seed_, static_cast<std::uint64_t>(h));
        for (int on : s.on) {
            x = derive_seed(x, static_cast<std::uint64_t>(on + 3));
        }
        return derive_seed(x, static_cast<std::uint64_t>(s.held + 3));
    }

    int blocks_;
    std::vector<int> target_;
    double quality_;
    std::uint64_t seed_;
    double floor_;
};

inline ScriptedBlocksPrior scripted_blocksworld_prior(const BlocksWorld& env, double quality, std::uint64_t seed = 0) {
    return ScriptedBlocksPrior(env, quality, seed);
}

/// Scripted grid prior: prefers moves that shorten the Manhattan distance to the goal.
class ScriptedGridPrior {
public:
    ScriptedGridPrior(const GridWorld& env, double quality, std::uint64_t seed = 0,
                      double floor = kDefaultPriorFloor)
        : env_(env), quality_(quality), seed_(seed), floor_(floor) {
        linvit::detail::require(quality >= 0.0 && quality <= 1.0, "ScriptedGridPrior: quality must lie in [0,1]");
    }

    std::vector<double> operator()(int h, const GridCell& c) const {
        std::vector<double> score(kGridActions, 0.0);
        std::vector<bool> legal(kGridActions, false);
        const auto goal = env_.layout().goal;
        const int here = std::abs(c.x - goal.x) + std::abs(c.y - goal.y);
        for (int a = 0; a < kGridActions; ++a) {
            legal[a] = env_.is_valid(c, a);
            const auto n = grid_move(c, a);
            const int there = std::abs(n.x - goal.x) + std::abs(n.y - goal.y);
            score[a] = 3.0 * static_cast<double>(here - there);
        }
        const std::uint64_t noise = derive_seed(derive_seed(derive_seed(seed_, h), c.x + 1), c.y + 1);
        return scripted_detail::blend_scores(score, legal, quality_, floor_, noise);
    }

private:
    GridWorld env_;
    double quality_;
    std::uint64_t seed_;
    double floor_;
};

}  // namespace linvit::planning
