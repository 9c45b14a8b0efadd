#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cookbench::gamegen {

enum class Direction : int { north = 0, south = 1, east = 2, west = 3 };

constexpr std::array<Direction, 4> kDirections = {Direction::north, Direction::south, Direction::east,
                                                  Direction::west};

const char* to_string(Direction d);
Direction opposite(Direction d);
std::optional<Direction> direction_from_string(const std::string& s);

enum class CutState : int { none = 0, chopped = 1, diced = 2, sliced = 3 };
enum class CookState : int { none = 0, fried = 1, roasted = 2, grilled = 3 };

const char* cut_verb(CutState s);        // chop / dice / slice
const char* cut_adjective(CutState s);   // chopped / diced / sliced
const char* cook_verb(CookState s);      // fry / roast / grill
const char* cook_adjective(CookState s); // fried / roasted / grilled
const char* cook_appliance(CookState s); // stove / oven / bbq

// Attribute combination describing one game type, mirroring names like
// "recipe3+take3+open+drop+go9".
struct TypeSpec {
    int recipe_size = 1;  // 1..3
    int room_count = 1;   // 1, 6, 9 or 12
    int needs_take = 0;   // 0..recipe_size
    bool needs_open = false;
    bool needs_drop = false;
    bool needs_cut = false;
    bool needs_cook = false;

    std::string key() const;
    int tier() const;  // 1..6, derived from room_count and recipe_size
    void validate() const;

    bool operator==(const TypeSpec&) const = default;
};

struct Tier {
    int id = 1;
    std::vector<TypeSpec> specs;
};

// All valid specs of a tier in a fixed enumeration order.
std::vector<TypeSpec> enumerate_tier_specs(int tier);
// Picks n specs evenly spaced over the enumeration (n <= total).
std::vector<TypeSpec> select_tier_specs(int tier, int n);

struct Door {
    std::string name;
    bool starts_closed = false;
};

struct Room {
    std::string name;  // display name, unique within a game
    std::string base;  // ontology name: kitchen, pantry, ...
    std::map<Direction, int> exits;      // direction -> room index
    std::map<Direction, int> exit_door;  // direction -> door index, entry only when a door exists
};

struct Container {
    std::string name;
    int room = -1;
    bool starts_closed = false;
};

enum class ItemKind : int { ingredient = 0, junk = 1 };

struct Item {
    enum class StartLoc : int { room_floor = 0, container = 1, inventory = 2 };
    std::string name;
    ItemKind kind = ItemKind::ingredient;
    StartLoc start_loc = StartLoc::room_floor;
    int start_room = -1;       // when room_floor
    int start_container = -1;  // when container
};

struct RecipeEntry {
    int item = -1;  // index into Game::items
    CutState cut = CutState::none;
    CookState cook = CookState::none;
    bool needs_acquisition = false;  // starts outside the inventory; first take scores
};

struct Game {
    std::string id;
    TypeSpec spec;
    int tier = 1;
    std::uint64_t seed = 0;

    std::vector<Room> rooms;
    std::vector<Door> doors;
    std::vector<Container> containers;
    std::vector<Item> items;
    std::vector<RecipeEntry> recipe;

    int start_room = 0;
    int kitchen = 0;
    int bbq_room = -1;  // -1: game has no BBQ; stove and oven are always in the kitchen
    int cookbook_container = -1;  // -1: cookbook lies in the kitchen
    int inventory_capacity = 0;   // 0 = unlimited; 3 when needs_drop
    int max_score = 0;

    const RecipeEntry* recipe_entry_for(int item) const;
    bool has_appliance(int room, CookState cook) const;
};

struct FamilyConfig {
    std::array<int, 6> types_per_tier = {3, 3, 3, 3, 3, 3};
    int games_per_type = 6;
    std::uint64_t seed = 1;
};

struct GameSet {
    std::vector<Game> games;
};

struct Splits {
    std::vector<std::string> train, dev, test1, test2;
};

struct TierReport {
    int tier = 0;
    int types = 0;
    int games = 0;
    long long max_score_total = 0;
};

struct UnsolvableGame : std::runtime_error {
    explicit UnsolvableGame(const std::string& m) : std::runtime_error(m) {}
};

// Deterministic for a fixed (spec, seed); the generated game is validated by
// oracle_solve before being returned.
Game generate_game(const TypeSpec& spec, std::uint64_t seed);
GameSet generate_family(const FamilyConfig& config);
Splits split_sets(const GameSet& set, int dev_count, std::uint64_t seed);
std::vector<TierReport> tier_reports(const GameSet& set);

// Action sequence reaching max_score in at most 100 steps, validated by
// replaying it through the engine. Throws UnsolvableGame when none is found.
std::vector<std::string> oracle_solve(const Game& game);

// Versioned human-readable game files (JSON with stable field ordering).
std::string game_to_text(const Game& game);
Game game_from_text(const std::string& text);
void save_game(const Game& game, const std::string& path);
Game load_game(const std::string& path);

}  // namespace cookbench::gamegen
