#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/random.hpp"

// Steps are zero-based throughout: a horizon-H problem acts at h = 0..H-1 and
// value tables carry one extra terminal row h = H that is identically zero.

namespace linvit {

inline constexpr double kRowTolerance = 1e-9;
inline constexpr double kDefaultPriorFloor = 1e-9;

/// Dense (steps x states) table of reals.
class StateTable {
public:
    StateTable() = default;
    StateTable(int steps, int states, double fill = 0.0)
        : steps_(steps), states_(states),
          data_(static_cast<std::size_t>(steps) * states, fill) {}

    int steps() const { return steps_; }
    int states() const { return states_; }

    double& operator()(int h, int s) { return data_[index(h, s)]; }
    double operator()(int h, int s) const { return data_[index(h, s)]; }

    std::span<double> row(int h) { return {data_.data() + index(h, 0), static_cast<std::size_t>(states_)}; }
    std::span<const double> row(int h) const {
        return {data_.data() + index(h, 0), static_cast<std::size_t>(states_)};
    }

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const StateTable&, const StateTable&) = default;

private:
    std::size_t index(int h, int s) const { return static_cast<std::size_t>(h) * states_ + s; }

    int steps_ = 0;
    int states_ = 0;
    std::vector<double> data_;
};

/// Dense (steps x states x actions) table of reals.
class ActionTable {
public:
    ActionTable() = default;
    ActionTable(int steps, int states, int actions, double fill = 0.0)
        : steps_(steps), states_(states), actions_(actions),
          data_(static_cast<std::size_t>(steps) * states * actions, fill) {}

    int steps() const { return steps_; }
    int states() const { return states_; }
    int actions() const { return actions_; }

    double& operator()(int h, int s, int a) { return data_[index(h, s) + a]; }
    double operator()(int h, int s, int a) const { return data_[index(h, s) + a]; }

    std::span<double> row(int h, int s) { return {data_.data() + index(h, s), static_cast<std::size_t>(actions_)}; }
    std::span<const double> row(int h, int s) const {
        return {data_.data() + index(h, s), static_cast<std::size_t>(actions_)};
    }

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const ActionTable&, const ActionTable&) = default;

private:
    std::size_t index(int h, int s) const {
        return (static_cast<std::size_t>(h) * states_ + s) * actions_;
    }

    int steps_ = 0;
    int states_ = 0;
    int actions_ = 0;
    std::vector<double> data_;
};

/// clip(x) = min{max{x, lo}, hi}.
inline double clip_value(double x, double lo, double hi) {
    detail::require(lo <= hi, "clip_value: lower bound exceeds upper bound");
    return std::min(std::max(x, lo), hi);
}

/// True when every entry is nonnegative and the sum is within tolerance of 1.
inline bool is_probability_row(std::span<const double> row, double tol = kRowTolerance) {
    double sum = 0.0;
    for (double p : row) {
        if (!(p >= 0.0)) {
            return false;
        }
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

/// Lowest index attaining the maximum.
inline int argmax(std::span<const double> values) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

/// Finite-horizon tabular MDP with deterministic rewards r_h(s,a) in [0,1]
/// and step-dependent transitions P_h(.|s,a).
class TabularMDP {
public:
    TabularMDP(int num_states, int num_actions, int horizon, std::vector<double> rewards,
               std::vector<double> transitions, int initial_state = 0)
        : S_(num_states), A_(num_actions), H_(horizon), s1_(initial_state),
          rewards_(std::move(rewards)), transitions_(std::move(transitions)) {
        detail::require(S_ > 0 && A_ > 0 && H_ > 0, "TabularMDP: S, A and H must be positive");
        detail::require(s1_ >= 0 && s1_ < S_, "TabularMDP: initial state out of range");
        const auto cells = static_cast<std::size_t>(H_) * S_ * A_;
        detail::require(rewards_.size() == cells, "TabularMDP: reward table has wrong size");
        detail::require(transitions_.size() == cells * S_, "TabularMDP: transition table has wrong size");
        for (double r : rewards_) {
            detail::require(r >= 0.0 && r <= 1.0, "TabularMDP: rewards must lie in [0,1]");
        }
        for (int h = 0; h < H_; ++h) {
            for (int s = 0; s < S_; ++s) {
                for (int a = 0; a < A_; ++a) {
                    detail::require(is_probability_row(transition(h, s, a)),
                                    "TabularMDP: transition row is not a distribution");
                }
            }
        }
    }

    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    int horizon() const { return H_; }
    int initial_state() const { return s1_; }

    double reward(int h, int s, int a) const { return rewards_[cell(h, s, a)]; }

    std::span<const double> transition(int h, int s, int a) const {
        return {transitions_.data() + cell(h, s, a) * S_, static_cast<std::size_t>(S_)};
    }

    /// True when every transition row is one-hot.
    bool is_deterministic() const {
        return std::all_of(transitions_.begin(), transitions_.end(),
                           [](double p) { return p == 0.0 || p == 1.0; });
    }

    const std::vector<double>& rewards() const { return rewards_; }
    const std::vector<double>& transitions() const { return transitions_; }

private:
    std::size_t cell(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * S_ + s) * A_ + a;
    }

    int S_;
    int A_;
    int H_;
    int s1_;
    std::vector<double> rewards_;
    std::vector<double> transitions_;
};

/// Per-step, per-state action distributions pi_h(.|s).
class StochasticPolicy {
public:
    StochasticPolicy(int horizon, int num_states, int num_actions, std::vector<double> probs)
        : table_(horizon, num_states, num_actions) {
        detail::require(horizon > 0 && num_states > 0 && num_actions > 0,
                        "StochasticPolicy: dimensions must be positive");
        detail::require(probs.size() == table_.data().size(), "StochasticPolicy: wrong table size");
        std::copy(probs.begin(), probs.end(), table_.row(0, 0).data());
        for (int h = 0; h < horizon; ++h) {
            for (int s = 0; s < num_states; ++s) {
                detail::require(is_probability_row(table_.row(h, s)),
                                "StochasticPolicy: row is not a probability vector");
            }
        }
    }

    static StochasticPolicy uniform(int horizon, int num_states, int num_actions) {
        return {horizon, num_states, num_actions,
                std::vector<double>(static_cast<std::size_t>(horizon) * num_states * num_actions,
                                    1.0 / num_actions)};
    }

    /// One-hot policy from an (h, s) -> action table laid out h-major.
    static StochasticPolicy deterministic(int horizon, int num_states, int num_actions,
                                          std::span<const int> actions) {
        detail::require(actions.size() == static_cast<std::size_t>(horizon) * num_states,
                        "StochasticPolicy: action table has wrong size");
        std::vector<double> probs(actions.size() * num_actions, 0.0);
        for (std::size_t i = 0; i < actions.size(); ++i) {
            detail::require(actions[i] >= 0 && actions[i] < num_actions,
                            "StochasticPolicy: action out of range");
            probs[i * num_actions + actions[i]] = 1.0;
        }
        return {horizon, num_states, num_actions, std::move(probs)};
    }

    int horizon() const { return table_.steps(); }
    int num_states() const { return table_.states(); }
    int num_actions() const { return table_.actions(); }

    std::span<const double> row(int h, int s) const { return table_.row(h, s); }
    double operator()(int h, int s, int a) const { return table_(h, s, a); }

    bool matches(const TabularMDP& mdp) const {
        return horizon() == mdp.horizon() && num_states() == mdp.num_states() &&
               num_actions() == mdp.num_actions();
    }

    const ActionTable& table() const { return table_; }

    friend bool operator==(const StochasticPolicy&, const StochasticPolicy&) = default;

private:
    ActionTable table_;
};

/// Floors a probability row so every entry is at least `floor` while keeping
/// the sum at 1: rows already above the floor are left untouched, otherwise
/// the row is mixed as floor + (1 - A*floor) * p.
inline void floor_row(std::span<double> row, double floor) {
    const bool needs_floor = std::any_of(row.begin(), row.end(), [&](double p) { return p < floor; });
    if (!needs_floor) {
        return;
    }
    const double keep = 1.0 - floor * static_cast<double>(row.size());
    for (double& p : row) {
        p = floor + keep * p;
    }
}

/// Externally supplied reference policy used as the KL anchor. Every entry is
/// floored so KL(pi || prior) is finite for any pi.
class PolicyPrior {
public:
    PolicyPrior(int horizon, int num_states, int num_actions, std::vector<double> probs,
                double floor = kDefaultPriorFloor)
        : policy_(make(horizon, num_states, num_actions, std::move(probs), floor)), floor_(floor) {}

    PolicyPrior(const StochasticPolicy& policy, double floor = kDefaultPriorFloor)
        : PolicyPrior(policy.horizon(), policy.num_states(), policy.num_actions(), policy.table().data(),
                      floor) {}

    static PolicyPrior uniform(int horizon, int num_states, int num_actions) {
        return PolicyPrior(StochasticPolicy::uniform(horizon, num_states, num_actions));
    }

    int horizon() const { return policy_.horizon(); }
    int num_states() const { return policy_.num_states(); }
    int num_actions() const { return policy_.num_actions(); }
    double floor() const { return floor_; }

    std::span<const double> row(int h, int s) const { return policy_.row(h, s); }
    double operator()(int h, int s, int a) const { return policy_(h, s, a); }

    bool matches(const TabularMDP& mdp) const { return policy_.matches(mdp); }

    /// The floored rows viewed as an ordinary policy.
    const StochasticPolicy& policy() const { return policy_; }

private:
    static StochasticPolicy make(int horizon, int num_states, int num_actions, std::vector<double> probs,
                                 double floor) {
        detail::require(floor > 0.0 && floor * num_actions < 1.0,
                        "PolicyPrior: floor must be positive and below 1/A");
        detail::require(probs.size() == static_cast<std::size_t>(horizon) * num_states * num_actions,
                        "PolicyPrior: wrong table size");
        for (std::size_t i = 0; i < probs.size(); i += num_actions) {
            std::span<double> row(probs.data() + i, static_cast<std::size_t>(num_actions));
            detail::require(is_probability_row(row), "PolicyPrior: row is not a probability vector");
            floor_row(row, floor);
        }
        return {horizon, num_states, num_actions, std::move(probs)};
    }

    StochasticPolicy policy_;
    double floor_;
};

struct TrajectoryStep {
    int h;
    int state;
    int action;
    double reward;
    int next_state;

    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

/// One episode; steps[h] is the transition taken at step h.
struct Trajectory {
    std::vector<TrajectoryStep> steps;

    double total_reward() const {
        double total = 0.0;
        for (const auto& step : steps) {
            total += step.reward;
        }
        return total;
    }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// d[h][s]: probability of being in s at step h.
struct OccupancyMeasure {
    StateTable d;
};

// ---------------------------------------------------------------------------
// Plain-text serialization.
//
//   S A H [s1]
//   reward block:     H*S lines of A values      (h-major, then s)
//   transition block: H*S*A lines of S values    (h-major, then s, then a)
//
// Blank lines and '#' comments are ignored. Values are written with the
// shortest round-trip decimal representation.

/// Shortest decimal string that parses back to exactly x.
inline std::string format_real(double x) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), x);
    return {buf, result.ptr};
}

inline void write_mdp(std::ostream& out, const TabularMDP& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    out << S << ' ' << A << ' ' << H << ' ' << mdp.initial_state() << '\n';
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                out << (a ? " " : "") << format_real(mdp.reward(h, s, a));
            }
            out << '\n';
        }
    }
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto row = mdp.transition(h, s, a);
                for (int sp = 0; sp < S; ++sp) {
                    out << (sp ? " " : "") << format_real(row[sp]);
                }
                out << '\n';
            }
        }
    }
}

namespace detail {

/// Whitespace-separated tokens with '#' comments stripped.
inline std::vector<std::string> tokenize(std::istream& in) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::size_t pos = 0;
        while (pos < line.size()) {
            const auto start = line.find_first_not_of(" \t\r", pos);
            if (start == std::string::npos) {
                break;
            }
            const auto end = line.find_first_of(" \t\r", start);
            tokens.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
            pos = end == std::string::npos ? line.size() : end;
        }
    }
    return tokens;
}

inline double parse_real(const std::string& token) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ConfigurationError("expected a number, got '" + token + "'");
    }
    require(used == token.size(), "expected a number, got '" + token + "'");
    return value;
}

inline int parse_int(const std::string& token) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(token, &used);
    } catch (const std::exception&) {
        throw ConfigurationError("expected an integer, got '" + token + "'");
    }
    require(used == token.size(), "expected an integer, got '" + token + "'");
    return static_cast<int>(value);
}

}  // namespace detail

inline TabularMDP read_mdp(std::istream& in) {
    const auto tokens = detail::tokenize(in);
    detail::require(tokens.size() >= 3, "read_mdp: missing 'S A H' header");
    const int S = detail::parse_int(tokens[0]);
    const int A = detail::parse_int(tokens[1]);
    const int H = detail::parse_int(tokens[2]);
    detail::require(S > 0 && A > 0 && H > 0, "read_mdp: S, A and H must be positive");
    const auto cells = static_cast<std::size_t>(H) * S * A;
    const std::size_t body = cells + cells * S;
    std::size_t pos = 3;
    int s1 = 0;
    if (tokens.size() == 4 + body) {
        s1 = detail::parse_int(tokens[3]);
        pos = 4;
    }
    detail::require(tokens.size() == pos + body, "read_mdp: wrong number of table entries");
    std::vector<double> rewards(cells);
    for (auto& r : rewards) {
        r = detail::parse_real(tokens[pos++]);
    }
    std::vector<double> transitions(cells * S);
    for (auto& p : transitions) {
        p = detail::parse_real(tokens[pos++]);
    }
    return {S, A, H, std::move(rewards), std::move(transitions), s1};
}

// ---------------------------------------------------------------------------
// Random instances for tests and experiments.

struct RandomMdpOptions {
    int num_states = 4;
    int num_actions = 2;
    int horizon = 3;
    /// Successor states with nonzero probability per row; 0 means all states.
    int branching = 0;
    /// Rewards are drawn uniformly from [0,1]; with sparsity p each is zeroed
    /// with probability p.
    double reward_sparsity = 0.0;
    bool deterministic = false;
};

inline TabularMDP random_mdp(const RandomMdpOptions& opt, std::uint64_t seed) {
    detail::require(opt.num_states > 0 && opt.num_actions > 0 && opt.horizon > 0,
                    "random_mdp: dimensions must be positive");
    const int S = opt.num_states;
    const int A = opt.num_actions;
    const int H = opt.horizon;
    const int branching = opt.deterministic ? 1 : (opt.branching > 0 ? std::min(opt.branching, S) : S);
    Rng rng(seed);
    const auto cells = static_cast<std::size_t>(H) * S * A;
    std::vector<double> rewards(cells);
    for (auto& r : rewards) {
        r = rng.uniform() < opt.reward_sparsity ? 0.0 : rng.uniform();
    }
    std::vector<double> transitions(cells * S, 0.0);
    std::vector<int> successors(S);
    for (std::size_t c = 0; c < cells; ++c) {
        for (int s = 0; s < S; ++s) {
            successors[s] = s;
        }
        for (int i = 0; i < branching; ++i) {
            const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(S - i)));
            std::swap(successors[i], successors[j]);
        }
        std::span<double> row(transitions.data() + c * S, static_cast<std::size_t>(S));
        double total = 0.0;
        for (int i = 0; i < branching; ++i) {
            const double w = -std::log(1.0 - rng.uniform());
            row[successors[i]] = w;
            total += w;
        }
        for (int i = 0; i < branching; ++i) {
            row[successors[i]] /= total;
        }
        if (branching == 1) {
            row[successors[0]] = 1.0;
        }
    }
    return {S, A, H, std::move(rewards), std::move(transitions), 0};
}

}  // namespace linvit
