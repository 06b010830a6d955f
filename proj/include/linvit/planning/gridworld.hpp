#pragma once

#include <cstdint>
#include <deque>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "linvit/errors.hpp"
#include "linvit/planning/environment.hpp"
#include "linvit/random.hpp"
#include "linvit/tabular.hpp"

// Sparse-reward goal-reaching grid. Actions: 0 up (y+1), 1 down, 2 left, 3 right.
// Moving into a wall or off the grid is an illegal no-op.

namespace linvit::planning {

struct GridCell {
    int x = 0;
    int y = 0;

    friend bool operator==(const GridCell&, const GridCell&) = default;
    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

inline constexpr int kGridActions = 4;

struct GridInstance {
    std::string id;
    int width = 0;
    int height = 0;
    std::vector<GridCell> walls;
    GridCell start;
    GridCell goal;
    int horizon = 0;

    bool inside(GridCell c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }

    bool blocked(GridCell c) const {
        for (const auto& w : walls) {
            if (w == c) {
                return true;
            }
        }
        return false;
    }

    void validate() const {
        detail::require(width >= 1 && height >= 1, "gridworld: size must be positive");
        detail::require(horizon >= 1, "gridworld: horizon must be at least 1");
        detail::require(inside(start) && inside(goal), "gridworld: start or goal outside the grid");
        detail::require(!blocked(start) && !blocked(goal), "gridworld: start or goal is a wall");
        for (const auto& w : walls) {
            detail::require(inside(w), "gridworld: wall outside the grid");
        }
    }
};

inline GridCell grid_move(GridCell c, int action) {
    static constexpr int kDx[] = {0, 0, -1, 1};
    static constexpr int kDy[] = {1, -1, 0, 0};
    return {c.x + kDx[action], c.y + kDy[action]};
}

class GridWorld : public EnvBase<GridWorld, GridCell> {
public:
    explicit GridWorld(const GridInstance& instance)
        : EnvBase(checked(instance).start, instance.horizon),
          layout_(std::make_shared<const GridInstance>(instance)),
          goal_(std::make_shared<const GoalSpec<GridCell>>(make_goal(instance.goal))) {}

    int num_actions() const { return kGridActions; }

    bool is_valid(const GridCell& c, int action) const {
        const auto next = grid_move(c, action);
        return layout_->inside(next) && !layout_->blocked(next);
    }

    GridCell next_state(const GridCell& c, int action) const {
        return is_valid(c, action) ? grid_move(c, action) : c;
    }

    const GoalSpec<GridCell>& goal() const { return *goal_; }
    const GridInstance& layout() const { return *layout_; }

private:
    static const GridInstance& checked(const GridInstance& instance) {
        instance.validate();
        return instance;
    }

    static GoalSpec<GridCell> make_goal(GridCell target) {
        GoalSpec<GridCell> goal;
        goal.add("x = " + std::to_string(target.x), [gx = target.x](const GridCell& c) { return c.x == gx; });
        goal.add("y = " + std::to_string(target.y), [gy = target.y](const GridCell& c) { return c.y == gy; });
        return goal;
    }

    std::shared_ptr<const GridInstance> layout_;
    std::shared_ptr<const GoalSpec<GridCell>> goal_;
};

static_assert(DeterministicEnv<GridWorld>);

inline GridWorld make_subgoal_gridworld(const GridInstance& instance) { return GridWorld(instance); }

/// Shortest start-to-goal path length (BFS), nullopt if unreachable.
inline std::optional<int> grid_distance(const GridInstance& instance) {
    instance.validate();
    std::vector<int> dist(static_cast<std::size_t>(instance.width) * instance.height, -1);
    auto at = [&](GridCell c) -> int& { return dist[static_cast<std::size_t>(c.y) * instance.width + c.x]; };
    std::deque<GridCell> queue{instance.start};
    at(instance.start) = 0;
    while (!queue.empty()) {
        const auto c = queue.front();
        queue.pop_front();
        if (c == instance.goal) {
            return at(c);
        }
        for (int a = 0; a < kGridActions; ++a) {
            const auto n = grid_move(c, a);
            if (instance.inside(n) && !instance.blocked(n) && at(n) < 0) {
                at(n) = at(c) + 1;
                queue.push_back(n);
            }
        }
    }
    return std::nullopt;
}

/// Random mazes whose shortest path is exactly `steps`; horizon = steps.
inline std::vector<GridInstance> generate_grid_instances(int width, int height, int steps, int count,
                                                         std::uint64_t seed, double wall_density = 0.2) {
    detail::require(width >= 2 && height >= 1 && steps >= 1 && count >= 0,
                    "generate_grid_instances: bad dimensions");
    Rng rng(seed);
    std::vector<GridInstance> out;
    for (int attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
        detail::require(attempt < 200000, "generate_grid_instances: could not find enough instances");
        GridInstance inst;
        inst.width = width;
        inst.height = height;
        inst.horizon = steps;
        auto random_cell = [&]() {
            return GridCell{static_cast<int>(rng.below(static_cast<std::uint64_t>(width))),
                            static_cast<int>(rng.below(static_cast<std::uint64_t>(height)))};
        };
        inst.start = random_cell();
        inst.goal = random_cell();
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const GridCell c{x, y};
                if (rng.uniform() < wall_density && c != inst.start && c != inst.goal) {
                    inst.walls.push_back(c);
                }
            }
        }
        if (grid_distance(inst) != std::optional<int>(steps)) {
            continue;
        }
        inst.id = "grid" + std::to_string(width) + "x" + std::to_string(height) + "-" + std::to_string(out.size());
        out.push_back(std::move(inst));
    }
    return out;
}

// Text format:
//
//   instance <id>
//   size 5 4
//   start 0 0
//   goal 4 3
//   wall 2 1
//   horizon 8

inline void write_grid_instance(std::ostream& out, const GridInstance& inst) {
    out << "instance " << (inst.id.empty() ? "unnamed" : inst.id) << '\n';
    out << "size " << inst.width << ' ' << inst.height << '\n';
    out << "start " << inst.start.x << ' ' << inst.start.y << '\n';
    out << "goal " << inst.goal.x << ' ' << inst.goal.y << '\n';
    for (const auto& w : inst.walls) {
        out << "wall " << w.x << ' ' << w.y << '\n';
    }
    out << "horizon " << inst.horizon << '\n';
}

inline std::vector<GridInstance> read_grid_instances(std::istream& in) {
    std::vector<GridInstance> out;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ConfigurationError("gridworld line " + std::to_string(line_no) + ": " + what);
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
        if (key == "instance") {
            out.emplace_back();
            fields >> out.back().id;
            continue;
        }
        if (out.empty()) {
            out.emplace_back();
        }
        auto& inst = out.back();
        std::vector<int> values;
        std::string token;
        while (fields >> token) {
            try {
                values.push_back(detail::parse_int(token));
            } catch (const ConfigurationError&) {
                fail("expected integers after '" + key + "'");
            }
        }
        if (key == "size" && values.size() == 2) {
            inst.width = values[0];
            inst.height = values[1];
        } else if (key == "start" && values.size() == 2) {
            inst.start = {values[0], values[1]};
        } else if (key == "goal" && values.size() == 2) {
            inst.goal = {values[0], values[1]};
        } else if (key == "wall" && values.size() == 2) {
            inst.walls.push_back({values[0], values[1]});
        } else if (key == "horizon" && values.size() == 1) {
            inst.horizon = values[0];
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
