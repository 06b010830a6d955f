#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/planning/environment.hpp"
#include "linvit/random.hpp"
#include "linvit/tabular.hpp"

// Blocks world with four verbs applied to a single block id each:
//   Stack b    put the held block on top of b
//   Unstack b  lift b off the block it rests on
//   Put b      put the held block b down on the table
//   Pickup b   lift b from the table
// Action index = verb * blocks + b. Illegal actions leave the state unchanged.
// Blocks are 0-based in code and 1-based in text files and predicate names.

namespace linvit::planning {

enum class BlockVerb : int { stack = 0, unstack = 1, put = 2, pickup = 3 };

inline constexpr int kBlockVerbs = 4;

struct BlocksState {
    static constexpr int kTable = -1;
    static constexpr int kHand = -2;

    /// on[b]: the block b rests on, kTable, or kHand while held.
    std::vector<int> on;
    int held = -1;

    bool clear(int b) const {
        if (on[b] == kHand) {
            return false;
        }
        return std::none_of(on.begin(), on.end(), [b](int support) { return support == b; });
    }

    friend bool operator==(const BlocksState&, const BlocksState&) = default;
    friend auto operator<=>(const BlocksState&, const BlocksState&) = default;
};

struct BlocksAction {
    BlockVerb verb;
    int block;
};

inline BlocksAction decode_blocks_action(int action, int blocks) {
    return {static_cast<BlockVerb>(action / blocks), action % blocks};
}

inline int encode_blocks_action(BlockVerb verb, int block, int blocks) {
    return static_cast<int>(verb) * blocks + block;
}

inline std::string describe_blocks_action(int action, int blocks) {
    static constexpr const char* kNames[] = {"Stack", "Unstack", "Put", "Pickup"};
    const auto [verb, block] = decode_blocks_action(action, blocks);
    return std::string(kNames[static_cast<int>(verb)]) + " " + std::to_string(block + 1);
}

inline bool blocks_action_valid(const BlocksState& s, int action) {
    const int n = static_cast<int>(s.on.size());
    const auto [verb, b] = decode_blocks_action(action, n);
    switch (verb) {
        case BlockVerb::stack:
            return s.held >= 0 && s.held != b && s.clear(b);
        case BlockVerb::unstack:
            return s.held < 0 && s.on[b] >= 0 && s.clear(b);
        case BlockVerb::put:
            return s.held == b;
        case BlockVerb::pickup:
            return s.held < 0 && s.on[b] == BlocksState::kTable && s.clear(b);
    }
    return false;
}

inline BlocksState blocks_successor(const BlocksState& s, int action) {
    if (!blocks_action_valid(s, action)) {
        return s;
    }
    const int n = static_cast<int>(s.on.size());
    const auto [verb, b] = decode_blocks_action(action, n);
    BlocksState next = s;
    switch (verb) {
        case BlockVerb::stack:
            next.on[s.held] = b;
            next.held = -1;
            break;
        case BlockVerb::unstack:
        case BlockVerb::pickup:
            next.on[b] = BlocksState::kHand;
            next.held = b;
            break;
        case BlockVerb::put:
            next.on[b] = BlocksState::kTable;
            next.held = -1;
            break;
    }
    return next;
}

/// A task: initial towers (bottom to top), "x on y" goal arrangements and a horizon.
struct BlocksInstance {
    std::string id;
    int blocks = 0;
    std::vector<std::vector<int>> stacks;
    std::vector<std::pair<int, int>> goal;
    int horizon = 0;

    BlocksState initial_state() const {
        BlocksState s;
        s.on.assign(static_cast<std::size_t>(blocks), BlocksState::kTable);
        for (const auto& tower : stacks) {
            for (std::size_t i = 1; i < tower.size(); ++i) {
                s.on[tower[i]] = tower[i - 1];
            }
        }
        return s;
    }

    void validate() const {
        detail::require(blocks >= 1, "blocksworld: need at least one block");
        detail::require(horizon >= 1, "blocksworld: horizon must be at least 1");
        std::vector<int> seen(static_cast<std::size_t>(blocks), 0);
        for (const auto& tower : stacks) {
            detail::require(!tower.empty(), "blocksworld: empty stack");
            for (int b : tower) {
                detail::require(b >= 0 && b < blocks, "blocksworld: block id out of range");
                ++seen[b];
            }
        }
        for (int count : seen) {
            detail::require(count == 1, "blocksworld: every block must appear in exactly one stack");
        }
        detail::require(!goal.empty(), "blocksworld: goal has no arrangements");
        std::vector<int> support(static_cast<std::size_t>(blocks), -1);
        std::vector<int> covered(static_cast<std::size_t>(blocks), 0);
        for (const auto& [x, y] : goal) {
            detail::require(x >= 0 && x < blocks && y >= 0 && y < blocks && x != y,
                            "blocksworld: malformed goal arrangement");
            detail::require(support[x] < 0, "blocksworld: a block cannot rest on two blocks");
            detail::require(covered[y] == 0, "blocksworld: two blocks cannot rest on the same block");
            support[x] = y;
            covered[y] = 1;
        }
        for (int b = 0; b < blocks; ++b) {
            int cur = b;
            for (int steps = 0; cur >= 0; ++steps) {
                detail::require(steps <= blocks, "blocksworld: goal arrangements form a cycle");
                cur = support[cur];
            }
        }
    }
};

inline GoalSpec<BlocksState> blocks_goal(const BlocksInstance& instance) {
    GoalSpec<BlocksState> goal;
    for (const auto& [x, y] : instance.goal) {
        goal.add(std::to_string(x + 1) + " on " + std::to_string(y + 1),
                 [x = x, y = y](const BlocksState& s) { return s.on[x] == y; });
    }
    return goal;
}

class BlocksWorld : public EnvBase<BlocksWorld, BlocksState> {
public:
    explicit BlocksWorld(const BlocksInstance& instance)
        : EnvBase(checked(instance).initial_state(), instance.horizon),
          blocks_(instance.blocks),
          goal_(std::make_shared<const GoalSpec<BlocksState>>(blocks_goal(instance))),
          arrangements_(std::make_shared<const std::vector<std::pair<int, int>>>(instance.goal)) {}

    int blocks() const { return blocks_; }
    int num_actions() const { return kBlockVerbs * blocks_; }

    BlocksState next_state(const BlocksState& s, int action) const { return blocks_successor(s, action); }
    bool is_valid(const BlocksState& s, int action) const { return blocks_action_valid(s, action); }

    const GoalSpec<BlocksState>& goal() const { return *goal_; }
    const std::vector<std::pair<int, int>>& arrangements() const { return *arrangements_; }

private:
    static const BlocksInstance& checked(const BlocksInstance& instance) {
        instance.validate();
        return instance;
    }

    int blocks_;
    std::shared_ptr<const GoalSpec<BlocksState>> goal_;
    std::shared_ptr<const std::vector<std::pair<int, int>>> arrangements_;
};

static_assert(DeterministicEnv<BlocksWorld>);

inline BlocksWorld make_blocksworld(const BlocksInstance& instance) { return BlocksWorld(instance); }

/// Length of the shortest action sequence reaching the goal, by breadth-first
/// search over the reachable state graph; nullopt if unreachable within max_depth.
inline std::optional<int> shortest_plan_length(const BlocksInstance& instance, int max_depth = 64) {
    instance.validate();
    const auto goal = blocks_goal(instance);
    const int actions = kBlockVerbs * instance.blocks;
    std::set<BlocksState> seen;
    std::deque<std::pair<BlocksState, int>> queue;
    auto start = instance.initial_state();
    seen.insert(start);
    queue.emplace_back(std::move(start), 0);
    while (!queue.empty()) {
        auto [s, depth] = queue.front();
        queue.pop_front();
        if (goal.reached(s)) {
            return depth;
        }
        if (depth >= max_depth) {
            continue;
        }
        for (int a = 0; a < actions; ++a) {
            if (!blocks_action_valid(s, a)) {
                continue;
            }
            auto next = blocks_successor(s, a);
            if (seen.insert(next).second) {
                queue.emplace_back(std::move(next), depth + 1);
            }
        }
    }
    return std::nullopt;
}

/// Random instances whose shortest plan is exactly `steps` actions; the
/// horizon equals `steps`.
inline std::vector<BlocksInstance> generate_blocks_instances(int blocks, int steps, int count, std::uint64_t seed,
                                                             int max_goal_arrangements = 3) {
    detail::require(blocks >= 2, "generate_blocks_instances: need at least two blocks");
    detail::require(steps >= 1 && count >= 0, "generate_blocks_instances: bad step or count");
    Rng rng(seed);
    std::vector<BlocksInstance> out;
    std::set<std::pair<std::vector<std::vector<int>>, std::vector<std::pair<int, int>>>> unique;
    const int max_goal = std::max(1, std::min(max_goal_arrangements, blocks - 1));
    for (int attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
        detail::require(attempt < 200000, "generate_blocks_instances: could not find enough instances");
        std::vector<int> order(static_cast<std::size_t>(blocks));
        for (int b = 0; b < blocks; ++b) {
            order[b] = b;
        }
        for (int i = blocks - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
        }
        BlocksInstance inst;
        inst.blocks = blocks;
        inst.horizon = steps;
        for (int b : order) {
            if (inst.stacks.empty() || rng.uniform() < 0.5) {
                inst.stacks.push_back({b});
            } else {
                inst.stacks.back().push_back(b);
            }
        }
        // Goal: a random tower over a random subset, keeping a few of its links.
        for (int i = blocks - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
        }
        const int links = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_goal)));
        for (int i = 0; i < links; ++i) {
            inst.goal.emplace_back(order[i + 1], order[i]);
        }
        std::sort(inst.goal.begin(), inst.goal.end());
        if (shortest_plan_length(inst, steps) != std::optional<int>(steps)) {
            continue;
        }
        if (!unique.insert({inst.stacks, inst.goal}).second) {
            continue;
        }
        inst.id = "bw" + std::to_string(blocks) + "-" + std::to_string(steps) + "-" + std::to_string(out.size());
        out.push_back(std::move(inst));
    }
    return out;
}

// Text format (one or more instances):
//
//   instance <id>
//   blocks 3
//   stack 2 1        # bottom to top: 1 rests on 2, 2 on the table
//   stack 3
//   goal 1 2         # block 1 on block 2
//   horizon 4
//
// Block ids are 1-based; '#' starts a comment.

inline void write_blocks_instance(std::ostream& out, const BlocksInstance& inst) {
    out << "instance " << (inst.id.empty() ? "unnamed" : inst.id) << '\n';
    out << "blocks " << inst.blocks << '\n';
    for (const auto& tower : inst.stacks) {
        out << "stack";
        for (int b : tower) {
            out << ' ' << b + 1;
        }
        out << '\n';
    }
    for (const auto& [x, y] : inst.goal) {
        out << "goal " << x + 1 << ' ' << y + 1 << '\n';
    }
    out << "horizon " << inst.horizon << '\n';
}

inline std::vector<BlocksInstance> read_blocks_instances(std::istream& in) {
    std::vector<BlocksInstance> out;
    std::string line;
    int line_no = 0;
    auto current = [&]() -> BlocksInstance& {
        if (out.empty()) {
            out.emplace_back();
        }
        return out.back();
    };
    auto fail = [&](const std::string& what) {
        throw ConfigurationError("blocksworld line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key)) {
            continue;
        }
        std::vector<int> values;
        std::string token;
        if (key == "instance") {
            out.emplace_back();
            fields >> out.back().id;
            continue;
        }
        while (fields >> token) {
            try {
                values.push_back(detail::parse_int(token));
            } catch (const ConfigurationError&) {
                fail("expected integers after '" + key + "'");
            }
        }
        auto& inst = current();
        if (key == "blocks" && values.size() == 1) {
            inst.blocks = values[0];
        } else if (key == "horizon" && values.size() == 1) {
            inst.horizon = values[0];
        } else if (key == "stack" && !values.empty()) {
            for (int& v : values) {
                --v;
            }
            inst.stacks.push_back(std::move(values));
        } else if (key == "goal" && values.size() == 2) {
            inst.goal.emplace_back(values[0] - 1, values[1] - 1);
        } else {
            fail("unrecognized entry '" + key + "'");
        }
    }
    for (const auto& inst : out) {
        inst.validate();
    }
    return out;
}

}  // namespace linvit::planning
