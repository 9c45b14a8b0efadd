#include <algorithm>
#include <string>
#include <vector>

#include "cookbench/engine.hpp"
#include "cookbench/gamegen.hpp"

namespace cookbench::gamegen {

namespace {

using engine::GameState;
using engine::ItemState;
using engine::Progress;

// Shortest room path by breadth-first search over the exit graph.
std::vector<int> bfs_path(const Game& g, int from, int to) {
    std::vector<int> prev(g.rooms.size(), -1);
    std::vector<int> queue = {from};
    prev[static_cast<std::size_t>(from)] = from;
    for (std::size_t qi = 0; qi < queue.size() && prev[static_cast<std::size_t>(to)] < 0; ++qi) {
        for (const auto& [d, next] : g.rooms[static_cast<std::size_t>(queue[qi])].exits) {
            if (prev[static_cast<std::size_t>(next)] < 0) {
                prev[static_cast<std::size_t>(next)] = queue[qi];
                queue.push_back(next);
            }
        }
    }
    std::vector<int> path;
    if (prev[static_cast<std::size_t>(to)] < 0) return path;
    for (int r = to; r != from; r = prev[static_cast<std::size_t>(r)]) path.push_back(r);
    path.push_back(from);
    std::reverse(path.begin(), path.end());
    return path;
}

struct Solver {
    const Game& g;
    GameState state;
    std::vector<std::string> plan;

    explicit Solver(const Game& game) : g(game) { state = engine::reset(game).first; }

    void fail(const std::string& why) { throw UnsolvableGame("game " + g.id + ": " + why); }

    void exec(const std::string& action) {
        if (plan.size() >= 120) fail("plan too long");
        auto result = engine::step(state, action);
        plan.push_back(action);
        if (result.done == Progress::lost) fail("plan lost the game at '" + action + "'");
    }

    void walk_to(int target) {
        if (state.current_room == target) return;
        auto path = bfs_path(g, state.current_room, target);
        if (path.empty()) fail("no path to room " + std::to_string(target));
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const auto& room = g.rooms[static_cast<std::size_t>(path[i])];
            Direction dir = Direction::north;
            bool found = false;
            for (const auto& [d, next] : room.exits) {
                if (next == path[i + 1]) {
                    dir = d;
                    found = true;
                    break;
                }
            }
            if (!found) fail("path edge vanished");
            auto door_it = room.exit_door.find(dir);
            if (door_it != room.exit_door.end() && !state.door_open[static_cast<std::size_t>(door_it->second)]) {
                exec("open " + g.doors[static_cast<std::size_t>(door_it->second)].name);
            }
            exec(std::string("go ") + to_string(dir));
        }
    }

    void drop_junk_if_full() {
        if (g.inventory_capacity == 0) return;
        int carried = 0;
        int junk = -1;
        for (std::size_t i = 0; i < state.items.size(); ++i) {
            if (state.items[i].where == ItemState::Where::inventory) {
                ++carried;
                if (g.items[i].kind == ItemKind::junk) junk = static_cast<int>(i);
            }
        }
        if (carried >= g.inventory_capacity) {
            if (junk < 0) fail("inventory full with no junk to drop");
            exec("drop " + g.items[static_cast<std::size_t>(junk)].name);
        }
    }

    void fetch(int item) {
        const ItemState& st = state.items[static_cast<std::size_t>(item)];
        if (st.where == ItemState::Where::inventory) return;
        if (st.where == ItemState::Where::room_floor) {
            walk_to(st.room);
            drop_junk_if_full();
            exec("take " + g.items[static_cast<std::size_t>(item)].name);
        } else if (st.where == ItemState::Where::container) {
            int c = st.container;
            walk_to(g.containers[static_cast<std::size_t>(c)].room);
            if (!state.container_open[static_cast<std::size_t>(c)]) {
                exec("open " + g.containers[static_cast<std::size_t>(c)].name);
            }
            drop_junk_if_full();
            exec("take " + g.items[static_cast<std::size_t>(item)].name + " from " +
                 g.containers[static_cast<std::size_t>(c)].name);
        } else {
            fail("needed item is unreachable");
        }
    }

    int room_distance(int from, int to) {
        auto p = bfs_path(g, from, to);
        return p.empty() ? 1 << 20 : static_cast<int>(p.size()) - 1;
    }

    void solve() {
        // gather: nearest-first over the needed ingredients
        std::vector<int> pending;
        for (const auto& e : g.recipe) {
            if (state.items[static_cast<std::size_t>(e.item)].where != ItemState::Where::inventory) {
                pending.push_back(e.item);
            }
        }
        while (!pending.empty()) {
            std::size_t best = 0;
            int best_d = 1 << 20;
            for (std::size_t i = 0; i < pending.size(); ++i) {
                const ItemState& st = state.items[static_cast<std::size_t>(pending[i])];
                int room = st.where == ItemState::Where::container
                               ? g.containers[static_cast<std::size_t>(st.container)].room
                               : st.room;
                int d = room_distance(state.current_room, room);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            fetch(pending[best]);
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
        }

        // read the recipe (required before preparing the meal)
        walk_to(g.kitchen);
        if (g.cookbook_container >= 0 &&
            !state.container_open[static_cast<std::size_t>(g.cookbook_container)]) {
            exec("open " + g.containers[static_cast<std::size_t>(g.cookbook_container)].name);
        }
        exec("examine cookbook");

        // knife work happens in the kitchen
        for (const auto& e : g.recipe) {
            if (e.cut == CutState::none) continue;
            exec(std::string(cut_verb(e.cut)) + " " + g.items[static_cast<std::size_t>(e.item)].name);
        }
        // stove and oven first, then one trip to the BBQ if needed
        for (const auto& e : g.recipe) {
            if (e.cook != CookState::fried && e.cook != CookState::roasted) continue;
            exec("cook " + g.items[static_cast<std::size_t>(e.item)].name + " with " + cook_appliance(e.cook));
        }
        bool any_grill = false;
        for (const auto& e : g.recipe) any_grill |= (e.cook == CookState::grilled);
        if (any_grill) {
            walk_to(g.bbq_room);
            for (const auto& e : g.recipe) {
                if (e.cook != CookState::grilled) continue;
                exec("cook " + g.items[static_cast<std::size_t>(e.item)].name + " with bbq");
            }
            walk_to(g.kitchen);
        }

        exec("prepare meal");
        exec("eat meal");

        if (state.done != Progress::won) fail("plan did not win");
        if (state.raw_score != g.max_score) {
            fail("plan scored " + std::to_string(state.raw_score) + " of " + std::to_string(g.max_score));
        }
        if (static_cast<int>(plan.size()) > engine::kMaxSteps) fail("plan exceeds the step cap");
    }
};

}  // namespace

std::vector<std::string> oracle_solve(const Game& game) {
    Solver solver(game);
    solver.solve();
    return solver.plan;
}

}  // namespace cookbench::gamegen
