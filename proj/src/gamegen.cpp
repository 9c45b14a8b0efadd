#include "cookbench/gamegen.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "cookbench/rng.hpp"
#include "cookbench/util.hpp"

namespace cookbench::gamegen {

namespace {

// Fixed world ontology. Keeping this small and closed is what makes the
// universal/instance knowledge distinction meaningful: verbs, appliances and
// room bases recur across games while concrete layouts and ingredients vary.
const std::vector<std::string> kRoomBases = {
    "kitchen", "pantry", "livingroom", "bedroom",  "bathroom",    "corridor",
    "backyard", "garden", "driveway",  "street",   "supermarket", "shed",
};

const std::vector<std::string> kRoomAdjectives = {"tidy", "messy", "sunlit", "dim", "cozy", "drafty"};

const std::vector<std::string> kIngredientBases = {
    "potato", "carrot", "onion",    "eggplant", "pepper",  "tomato",
    "apple",  "banana", "cucumber", "lettuce",  "chicken", "pork",
};

const std::vector<std::string> kIngredientAdjectives = {"purple", "yellow", "red",   "green",
                                                        "white",  "orange", "fresh", "ripe"};

const std::vector<std::string> kJunkNames = {"wooden spoon",  "empty bottle", "old newspaper",
                                             "plastic cup",   "dirty plate",  "rusty fork"};

const std::vector<std::string> kDoorNames = {"wooden door", "sliding door", "screen door", "glass door",
                                             "iron gate",   "barn door",    "patio door",  "front door"};

struct GridPos {
    int x = 0;
    int y = 0;
    bool operator<(const GridPos& o) const { return x < o.x || (x == o.x && y < o.y); }
};

GridPos neighbor(GridPos p, Direction d) {
    switch (d) {
        case Direction::north: return {p.x, p.y + 1};
        case Direction::south: return {p.x, p.y - 1};
        case Direction::east: return {p.x + 1, p.y};
        case Direction::west: return {p.x - 1, p.y};
    }
    return p;
}

}  // namespace

const char* to_string(Direction d) {
    switch (d) {
        case Direction::north: return "north";
        case Direction::south: return "south";
        case Direction::east: return "east";
        case Direction::west: return "west";
    }
    return "?";
}

Direction opposite(Direction d) {
    switch (d) {
        case Direction::north: return Direction::south;
        case Direction::south: return Direction::north;
        case Direction::east: return Direction::west;
        case Direction::west: return Direction::east;
    }
    return d;
}

std::optional<Direction> direction_from_string(const std::string& s) {
    for (Direction d : kDirections) {
        if (s == to_string(d)) return d;
    }
    return std::nullopt;
}

const char* cut_verb(CutState s) {
    switch (s) {
        case CutState::chopped: return "chop";
        case CutState::diced: return "dice";
        case CutState::sliced: return "slice";
        default: return "";
    }
}

const char* cut_adjective(CutState s) {
    switch (s) {
        case CutState::chopped: return "chopped";
        case CutState::diced: return "diced";
        case CutState::sliced: return "sliced";
        default: return "";
    }
}

const char* cook_verb(CookState s) {
    switch (s) {
        case CookState::fried: return "fry";
        case CookState::roasted: return "roast";
        case CookState::grilled: return "grill";
        default: return "";
    }
}

const char* cook_adjective(CookState s) {
    switch (s) {
        case CookState::fried: return "fried";
        case CookState::roasted: return "roasted";
        case CookState::grilled: return "grilled";
        default: return "";
    }
}

const char* cook_appliance(CookState s) {
    switch (s) {
        case CookState::fried: return "stove";
        case CookState::roasted: return "oven";
        case CookState::grilled: return "bbq";
        default: return "";
    }
}

std::string TypeSpec::key() const {
    std::string k = "recipe" + std::to_string(recipe_size);
    k += "+take" + std::to_string(needs_take);
    if (needs_open) k += "+open";
    if (needs_drop) k += "+drop";
    if (needs_cut) k += "+cut";
    if (needs_cook) k += "+cook";
    if (room_count > 1) k += "+go" + std::to_string(room_count);
    return k;
}

int TypeSpec::tier() const {
    if (room_count == 1) return recipe_size;
    if (room_count == 6) return 4;
    if (room_count == 9) return 5;
    return 6;
}

void TypeSpec::validate() const {
    if (recipe_size < 1 || recipe_size > 3) throw ConfigError("recipe_size must be 1..3");
    if (room_count != 1 && room_count != 6 && room_count != 9 && room_count != 12) {
        throw ConfigError("room_count must be one of {1,6,9,12}");
    }
    if (needs_take < 0 || needs_take > recipe_size) {
        throw ConfigError("needs_take must be 0..recipe_size (spec '" + key() + "')");
    }
    if (needs_drop && needs_take < 1) throw ConfigError("needs_drop requires needs_take >= 1");
}

std::vector<TypeSpec> enumerate_tier_specs(int tier) {
    if (tier < 1 || tier > 6) throw ConfigError("tier must be 1..6");
    int room_count = tier <= 3 ? 1 : (tier == 4 ? 6 : (tier == 5 ? 9 : 12));
    std::vector<int> recipe_sizes = tier <= 3 ? std::vector<int>{tier} : std::vector<int>{1, 2, 3};
    std::vector<TypeSpec> out;
    for (int rs : recipe_sizes) {
        for (int take = 0; take <= rs; ++take) {
            for (int open = 0; open <= 1; ++open) {
                for (int drop = 0; drop <= 1; ++drop) {
                    if (drop && take < 1) continue;
                    for (int cut = 0; cut <= 1; ++cut) {
                        for (int cook = 0; cook <= 1; ++cook) {
                            out.push_back(TypeSpec{rs, room_count, take, open != 0, drop != 0, cut != 0, cook != 0});
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<TypeSpec> select_tier_specs(int tier, int n) {
    auto all = enumerate_tier_specs(tier);
    if (n < 1 || static_cast<std::size_t>(n) > all.size()) {
        throw ConfigError("tier " + std::to_string(tier) + " supports 1.." + std::to_string(all.size()) +
                          " types, requested " + std::to_string(n));
    }
    std::vector<TypeSpec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.push_back(all[static_cast<std::size_t>(i) * all.size() / static_cast<std::size_t>(n)]);
    }
    return out;
}

const RecipeEntry* Game::recipe_entry_for(int item) const {
    for (const auto& e : recipe) {
        if (e.item == item) return &e;
    }
    return nullptr;
}

bool Game::has_appliance(int room, CookState cook) const {
    switch (cook) {
        case CookState::fried:
        case CookState::roasted: return room == kitchen;
        case CookState::grilled: return bbq_room >= 0 && room == bbq_room;
        default: return false;
    }
}

namespace {

struct WorldDraft {
    Game game;
    Rng rng;
    explicit WorldDraft(std::uint64_t seed) : rng(seed) {}
};

void build_rooms(Game& g, const TypeSpec& spec, Rng& rng, bool want_backyard) {
    int n = spec.room_count;
    std::vector<std::string> bases;
    bases.push_back("kitchen");
    if (n > 1) {
        std::vector<std::string> others;
        for (const auto& b : kRoomBases) {
            if (b != "kitchen") others.push_back(b);
        }
        rng.shuffle(others);
        if (want_backyard) {
            // make sure the BBQ has a home
            auto it = std::find(others.begin(), others.end(), "backyard");
            std::rotate(others.begin(), it, it + 1);
        }
        for (int i = 0; i + 1 < n; ++i) bases.push_back(others[static_cast<std::size_t>(i)]);
        rng.shuffle(bases);
    }

    std::map<GridPos, int> grid;
    std::vector<GridPos> pos(static_cast<std::size_t>(n));
    g.rooms.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::string& base = bases[static_cast<std::size_t>(i)];
        g.rooms[static_cast<std::size_t>(i)].base = base;
        std::string adj;
        // the kitchen keeps its plain name; other rooms vary lexically per game
        if (base != "kitchen" && rng.chance(0.5)) adj = rng.pick(kRoomAdjectives) + " ";
        g.rooms[static_cast<std::size_t>(i)].name = adj + base;
        if (base == "kitchen") g.kitchen = i;
    }

    grid[{0, 0}] = 0;
    pos[0] = {0, 0};
    for (int i = 1; i < n; ++i) {
        // attach room i next to a random placed room with a free neighbor cell
        while (true) {
            int anchor = static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(i)));
            std::vector<Direction> free_dirs;
            for (Direction d : kDirections) {
                if (!grid.count(neighbor(pos[static_cast<std::size_t>(anchor)], d))) free_dirs.push_back(d);
            }
            if (free_dirs.empty()) continue;
            Direction d = rng.pick(free_dirs);
            GridPos p = neighbor(pos[static_cast<std::size_t>(anchor)], d);
            grid[p] = i;
            pos[static_cast<std::size_t>(i)] = p;
            g.rooms[static_cast<std::size_t>(anchor)].exits[d] = i;
            g.rooms[static_cast<std::size_t>(i)].exits[opposite(d)] = anchor;
            break;
        }
    }
    // a few extra connections beyond the spanning tree
    for (int i = 0; i < n; ++i) {
        for (Direction d : {Direction::north, Direction::east}) {
            auto it = grid.find(neighbor(pos[static_cast<std::size_t>(i)], d));
            if (it == grid.end()) continue;
            int j = it->second;
            if (g.rooms[static_cast<std::size_t>(i)].exits.count(d)) continue;
            if (rng.chance(0.35)) {
                g.rooms[static_cast<std::size_t>(i)].exits[d] = j;
                g.rooms[static_cast<std::size_t>(j)].exits[opposite(d)] = i;
            }
        }
    }
}

void build_containers(Game& g) {
    for (std::size_t i = 0; i < g.rooms.size(); ++i) {
        const std::string& base = g.rooms[i].base;
        if (base == "kitchen") {
            g.containers.push_back({"fridge", static_cast<int>(i), false});
            g.containers.push_back({"cupboard", static_cast<int>(i), false});
        } else if (base == "pantry") {
            g.containers.push_back({"shelf", static_cast<int>(i), false});
        } else if (base == "shed") {
            g.containers.push_back({"toolbox", static_cast<int>(i), false});
        }
    }
}

std::vector<std::string> draw_ingredient_names(Rng& rng, std::size_t count) {
    std::set<std::string> used;
    std::vector<std::string> out;
    while (out.size() < count) {
        std::string name = rng.pick(kIngredientAdjectives) + " " + rng.pick(kIngredientBases);
        if (used.insert(name).second) out.push_back(name);
    }
    return out;
}

// BFS over the room exit graph; door states are ignored (doors can be opened).
std::vector<int> path_between(const Game& g, int from, int to) {
    std::vector<int> prev(g.rooms.size(), -1);
    std::vector<int> queue = {from};
    prev[static_cast<std::size_t>(from)] = from;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int r = queue[qi];
        if (r == to) break;
        for (const auto& [d, next] : g.rooms[static_cast<std::size_t>(r)].exits) {
            if (prev[static_cast<std::size_t>(next)] < 0) {
                prev[static_cast<std::size_t>(next)] = r;
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

int container_in_room(const Game& g, int room) {
    for (std::size_t c = 0; c < g.containers.size(); ++c) {
        if (g.containers[c].room == room) return static_cast<int>(c);
    }
    return -1;
}

Game generate_attempt(const TypeSpec& spec, std::uint64_t seed) {
    Rng rng(derive_seed(seed, fnv1a64("gamegen")));
    Game g;
    g.spec = spec;
    g.tier = spec.tier();
    g.seed = seed;
    g.id = spec.key() + "-s" + std::to_string(seed);
    g.inventory_capacity = spec.needs_drop ? 3 : 0;

    // recipe preparation requirements come first so room construction knows
    // whether a BBQ (and thus a backyard) is needed
    std::vector<CutState> cuts(static_cast<std::size_t>(spec.recipe_size), CutState::none);
    std::vector<CookState> cooks(static_cast<std::size_t>(spec.recipe_size), CookState::none);
    const std::vector<CutState> cut_choices = {CutState::chopped, CutState::diced, CutState::sliced};
    std::vector<CookState> cook_choices = {CookState::fried, CookState::roasted};
    if (spec.room_count > 1) cook_choices.push_back(CookState::grilled);
    if (spec.needs_cut) {
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            if (i == 0 || rng.chance(0.6)) cuts[i] = rng.pick(cut_choices);
        }
    }
    if (spec.needs_cook) {
        for (std::size_t i = 0; i < cooks.size(); ++i) {
            if (i == 0 || rng.chance(0.6)) cooks[i] = rng.pick(cook_choices);
        }
    }
    bool want_bbq = std::count(cooks.begin(), cooks.end(), CookState::grilled) > 0;

    build_rooms(g, spec, rng, want_bbq);
    build_containers(g);
    if (want_bbq) {
        for (std::size_t i = 0; i < g.rooms.size(); ++i) {
            if (g.rooms[i].base == "backyard") g.bbq_room = static_cast<int>(i);
        }
        if (g.bbq_room < 0) g.bbq_room = g.kitchen;  // defensive; backyard is forced above
    }

    g.start_room = spec.room_count == 1
                       ? g.kitchen
                       : static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(spec.room_count)));
    if (spec.room_count > 1 && spec.needs_open && spec.needs_take == 0 && g.start_room == g.kitchen) {
        // a closed door must lie on the winning path, so start the player away
        // from the kitchen when nothing needs fetching
        g.start_room = (g.kitchen + 1) % spec.room_count;
    }

    // ingredients and junk
    int distractors = spec.room_count == 1 ? 1 + static_cast<int>(rng.uniform_u64(2))
                                           : 2 + static_cast<int>(rng.uniform_u64(3));
    auto names = draw_ingredient_names(rng, static_cast<std::size_t>(spec.recipe_size + distractors));
    std::vector<int> acquisition_slots(static_cast<std::size_t>(spec.recipe_size));
    for (int i = 0; i < spec.recipe_size; ++i) acquisition_slots[static_cast<std::size_t>(i)] = i;
    rng.shuffle(acquisition_slots);

    for (int i = 0; i < spec.recipe_size; ++i) {
        Item item;
        item.name = names[static_cast<std::size_t>(i)];
        item.kind = ItemKind::ingredient;
        g.items.push_back(item);
        RecipeEntry entry;
        entry.item = static_cast<int>(g.items.size()) - 1;
        entry.cut = cuts[static_cast<std::size_t>(i)];
        entry.cook = cooks[static_cast<std::size_t>(i)];
        entry.needs_acquisition = false;
        g.recipe.push_back(entry);
    }
    for (int i = 0; i < spec.needs_take; ++i) {
        g.recipe[static_cast<std::size_t>(acquisition_slots[static_cast<std::size_t>(i)])].needs_acquisition = true;
    }

    auto place_somewhere = [&](Item& item) {
        int room = static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(spec.room_count)));
        int cont = container_in_room(g, room);
        if (cont >= 0 && rng.chance(0.5)) {
            item.start_loc = Item::StartLoc::container;
            item.start_container = cont;
            item.start_room = room;
        } else {
            item.start_loc = Item::StartLoc::room_floor;
            item.start_room = room;
        }
    };

    for (auto& entry : g.recipe) {
        Item& item = g.items[static_cast<std::size_t>(entry.item)];
        if (entry.needs_acquisition) {
            place_somewhere(item);
        } else {
            item.start_loc = Item::StartLoc::inventory;
        }
    }
    for (int i = 0; i < distractors; ++i) {
        Item item;
        item.name = names[static_cast<std::size_t>(spec.recipe_size + i)];
        item.kind = ItemKind::ingredient;
        place_somewhere(item);
        g.items.push_back(item);
    }
    if (spec.needs_drop) {
        int junk_count = 3 - (spec.recipe_size - spec.needs_take);
        std::vector<std::string> junk = kJunkNames;
        rng.shuffle(junk);
        for (int i = 0; i < junk_count; ++i) {
            Item item;
            item.name = junk[static_cast<std::size_t>(i)];
            item.kind = ItemKind::junk;
            item.start_loc = Item::StartLoc::inventory;
            g.items.push_back(item);
        }
    }

    // realize needs_open: something closed must sit on the winning path
    if (spec.needs_open) {
        std::vector<int> candidates;  // container indices holding a needed ingredient
        for (const auto& entry : g.recipe) {
            const Item& item = g.items[static_cast<std::size_t>(entry.item)];
            if (entry.needs_acquisition && item.start_loc == Item::StartLoc::container) {
                candidates.push_back(item.start_container);
            }
        }
        std::vector<std::pair<int, Direction>> path_edges;  // (room, direction) along needed routes
        if (spec.room_count > 1) {
            std::vector<int> targets;
            for (const auto& entry : g.recipe) {
                const Item& item = g.items[static_cast<std::size_t>(entry.item)];
                if (entry.needs_acquisition) targets.push_back(item.start_room);
            }
            targets.push_back(g.kitchen);
            for (int t : targets) {
                auto path = path_between(g, g.start_room, t);
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    for (const auto& [d, next] : g.rooms[static_cast<std::size_t>(path[i])].exits) {
                        if (next == path[i + 1]) path_edges.emplace_back(path[i], d);
                    }
                }
            }
        }

        int mechanism;  // 0: closed container with needed item, 1: closed door on path, 2: cookbook locked away
        std::vector<int> options;
        if (!candidates.empty()) options.push_back(0);
        if (!path_edges.empty()) options.push_back(1);
        options.push_back(2);
        mechanism = options[rng.uniform_u64(options.size())];

        std::vector<std::string> door_pool = kDoorNames;
        rng.shuffle(door_pool);
        if (mechanism == 0) {
            g.containers[static_cast<std::size_t>(candidates[rng.uniform_u64(candidates.size())])].starts_closed =
                true;
        } else if (mechanism == 1) {
            auto [room, dir] = path_edges[rng.uniform_u64(path_edges.size())];
            int other = g.rooms[static_cast<std::size_t>(room)].exits.at(dir);
            int door_index = static_cast<int>(g.doors.size());
            g.doors.push_back({door_pool.back(), true});
            door_pool.pop_back();
            g.rooms[static_cast<std::size_t>(room)].exit_door[dir] = door_index;
            g.rooms[static_cast<std::size_t>(other)].exit_door[opposite(dir)] = door_index;
        } else {
            int cont = container_in_room(g, g.kitchen);  // fridge or cupboard; kitchen always has both
            // prefer the cupboard for the cookbook
            for (std::size_t c = 0; c < g.containers.size(); ++c) {
                if (g.containers[c].room == g.kitchen && g.containers[c].name == "cupboard") {
                    cont = static_cast<int>(c);
                }
            }
            g.cookbook_container = cont;
            g.containers[static_cast<std::size_t>(cont)].starts_closed = true;
        }
        // extra closed containers holding needed items (the player must open them too)
        for (int c : candidates) {
            if (rng.chance(0.5)) g.containers[static_cast<std::size_t>(c)].starts_closed = true;
        }
    }

    g.max_score = spec.needs_take + 1;
    for (const auto& entry : g.recipe) {
        if (entry.cut != CutState::none) ++g.max_score;
        if (entry.cook != CookState::none) ++g.max_score;
    }
    return g;
}

}  // namespace

Game generate_game(const TypeSpec& spec, std::uint64_t seed) {
    spec.validate();
    for (std::uint64_t attempt = 0; attempt < 20; ++attempt) {
        Game g = generate_attempt(spec, attempt == 0 ? seed : derive_seed(seed, 0x9000 + attempt));
        g.seed = seed;
        g.id = spec.key() + "-s" + std::to_string(seed);
        try {
            oracle_solve(g);
            return g;
        } catch (const UnsolvableGame&) {
            continue;  // deterministic retry with a derived sub-seed
        }
    }
    throw UnsolvableGame("no solvable layout found for spec " + spec.key() + " seed " + std::to_string(seed));
}

GameSet generate_family(const FamilyConfig& config) {
    if (config.games_per_type < 1) throw ConfigError("games_per_type must be >= 1");
    GameSet set;
    for (int tier = 1; tier <= 6; ++tier) {
        int n_types = config.types_per_tier[static_cast<std::size_t>(tier - 1)];
        if (n_types == 0) continue;
        auto specs = select_tier_specs(tier, n_types);
        for (std::size_t ti = 0; ti < specs.size(); ++ti) {
            for (int gi = 0; gi < config.games_per_type; ++gi) {
                std::uint64_t seed = derive_seed(config.seed, fnv1a64(specs[ti].key()) ^ static_cast<std::uint64_t>(gi));
                Game g = generate_game(specs[ti], seed);
                g.id = "t" + std::to_string(tier) + "-" + specs[ti].key() + "-g" + std::to_string(gi);
                set.games.push_back(std::move(g));
            }
        }
    }
    return set;
}

Splits split_sets(const GameSet& set, int dev_count, std::uint64_t seed) {
    if (dev_count < 0) throw ConfigError("dev_count must be >= 0");
    std::map<std::string, std::vector<std::string>> by_type;
    std::map<std::string, int> type_tier;
    for (const auto& g : set.games) {
        std::string type_key = "t" + std::to_string(g.tier) + "-" + g.spec.key();
        by_type[type_key].push_back(g.id);
        type_tier[type_key] = g.tier;
    }
    Rng rng(derive_seed(seed, fnv1a64("splits")));
    Splits s;
    std::vector<std::string> remainder;
    for (auto& [type_key, ids] : by_type) {
        if (ids.size() < 3) {
            throw DataError("type " + type_key + " has only " + std::to_string(ids.size()) +
                            " games; need >= 3 for splits");
        }
        std::vector<std::string> shuffled = ids;
        rng.shuffle(shuffled);
        s.test1.push_back(shuffled[0]);
        s.test2.push_back(shuffled[1]);
        for (std::size_t i = 2; i < shuffled.size(); ++i) remainder.push_back(shuffled[i]);
    }
    if (static_cast<std::size_t>(dev_count) >= remainder.size()) {
        throw DataError("dev_count " + std::to_string(dev_count) + " leaves no training games");
    }
    rng.shuffle(remainder);
    s.dev.assign(remainder.begin(), remainder.begin() + dev_count);
    s.train.assign(remainder.begin() + dev_count, remainder.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.dev.begin(), s.dev.end());
    std::sort(s.test1.begin(), s.test1.end());
    std::sort(s.test2.begin(), s.test2.end());
    return s;
}

std::vector<TierReport> tier_reports(const GameSet& set) {
    std::vector<TierReport> out(6);
    for (int t = 0; t < 6; ++t) out[static_cast<std::size_t>(t)].tier = t + 1;
    std::array<std::set<std::string>, 6> types;
    for (const auto& g : set.games) {
        auto& r = out[static_cast<std::size_t>(g.tier - 1)];
        ++r.games;
        r.max_score_total += g.max_score;
        types[static_cast<std::size_t>(g.tier - 1)].insert(g.spec.key());
    }
    for (int t = 0; t < 6; ++t) {
        out[static_cast<std::size_t>(t)].types = static_cast<int>(types[static_cast<std::size_t>(t)].size());
    }
    return out;
}

}  // namespace cookbench::gamegen
