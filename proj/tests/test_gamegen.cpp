#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "cookbench/engine.hpp"
#include "cookbench/gamegen.hpp"
#include "cookbench/util.hpp"

using namespace cookbench;
using namespace cookbench::gamegen;

namespace {

void check_exit_consistency(const Game& g) {
    for (std::size_t r = 0; r < g.rooms.size(); ++r) {
        for (const auto& [d, to] : g.rooms[r].exits) {
            REQUIRE(to >= 0);
            REQUIRE(to < static_cast<int>(g.rooms.size()));
            const auto& back = g.rooms[static_cast<std::size_t>(to)].exits;
            auto it = back.find(opposite(d));
            REQUIRE(it != back.end());
            CHECK(it->second == static_cast<int>(r));
        }
    }
    // connectivity
    std::vector<bool> seen(g.rooms.size(), false);
    std::vector<int> queue = {0};
    seen[0] = true;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        for (const auto& [d, to] : g.rooms[static_cast<std::size_t>(queue[qi])].exits) {
            if (!seen[static_cast<std::size_t>(to)]) {
                seen[static_cast<std::size_t>(to)] = true;
                queue.push_back(to);
            }
        }
    }
    for (bool s : seen) CHECK(s);
}

int replay_score(const Game& g, const std::vector<std::string>& plan) {
    auto [state, obs] = engine::reset(g);
    for (const auto& a : plan) engine::step(state, a);
    REQUIRE(state.done == engine::Progress::won);
    return state.raw_score;
}

}  // namespace

TEST_CASE("tier-1 spec at seed 7 gives a one-room one-ingredient game") {
    TypeSpec spec{1, 1, 1, false, false, false, false};
    auto g = generate_game(spec, 7);
    CHECK(g.rooms.size() == 1);
    CHECK(g.recipe.size() == 1);
    CHECK(g.tier == 1);
    CHECK(g.rooms[0].base == "kitchen");
    CHECK(g.rooms[0].exits.empty());
}

TEST_CASE("same spec and seed give a byte-identical game") {
    TypeSpec spec{2, 6, 1, true, false, true, true};
    auto a = generate_game(spec, 1234);
    auto b = generate_game(spec, 1234);
    CHECK(game_to_text(a) == game_to_text(b));
    auto c = generate_game(spec, 1235);
    CHECK(game_to_text(a) != game_to_text(c));
}

TEST_CASE("tier-6 spec at seed 3: twelve connected rooms with consistent exits") {
    TypeSpec spec{3, 12, 2, true, false, false, true};
    auto g = generate_game(spec, 3);
    CHECK(g.rooms.size() == 12);
    check_exit_consistency(g);
    std::set<std::string> names;
    for (const auto& r : g.rooms) names.insert(r.name);
    CHECK(names.size() == 12);  // display names unique
}

TEST_CASE("specs with needs_take above recipe_size are rejected") {
    TypeSpec spec{1, 1, 2, false, false, false, false};
    CHECK_THROWS_AS(generate_game(spec, 1), ConfigError);
    TypeSpec drop_without_take{1, 1, 0, false, true, false, false};
    CHECK_THROWS_AS(generate_game(drop_without_take, 1), ConfigError);
}

TEST_CASE("max_score follows the scoring rule: take + preparations + goal") {
    // single ingredient, must take, must cook: 1 + 1 + 1
    TypeSpec spec{1, 1, 1, false, false, false, true};
    auto g = generate_game(spec, 11);
    int preps = 0;
    for (const auto& e : g.recipe) {
        if (e.cut != CutState::none) ++preps;
        if (e.cook != CookState::none) ++preps;
    }
    CHECK(preps >= 1);
    CHECK(g.max_score == 1 + preps + 1);
}

TEST_CASE("family of 2 types per tier and 5 games per type has 60 games") {
    FamilyConfig cfg;
    cfg.types_per_tier = {2, 2, 2, 2, 2, 2};
    cfg.games_per_type = 5;
    cfg.seed = 99;
    auto set = generate_family(cfg);
    CHECK(set.games.size() == 60);
    std::set<std::string> ids;
    for (const auto& g : set.games) ids.insert(g.id);
    CHECK(ids.size() == 60);
}

TEST_CASE("every family game withstands oracle replay at full score in <= 100 steps") {
    FamilyConfig cfg;
    cfg.types_per_tier = {2, 2, 2, 2, 2, 2};
    cfg.games_per_type = 3;
    cfg.seed = 4242;
    auto set = generate_family(cfg);
    for (const auto& g : set.games) {
        auto plan = oracle_solve(g);
        CHECK(plan.size() <= 100);
        CHECK(replay_score(g, plan) == g.max_score);
        check_exit_consistency(g);
    }
}

TEST_CASE("oracle emits no cut or cook for an already-prepared ingredient") {
    // take0 and no preparation flags: ingredient starts ready in the inventory
    TypeSpec spec{1, 1, 0, false, false, false, false};
    auto g = generate_game(spec, 5);
    auto plan = oracle_solve(g);
    for (const auto& a : plan) {
        CHECK(a.rfind("chop", 0) != 0);
        CHECK(a.rfind("dice", 0) != 0);
        CHECK(a.rfind("slice", 0) != 0);
        CHECK(a.rfind("cook", 0) != 0);
    }
    // minimal winning shape: examine, prepare, eat
    CHECK(plan.back() == "eat meal");
    CHECK(plan[plan.size() - 2] == "prepare meal");
}

TEST_CASE("oracle ends a cook-requiring game with cook then prepare then eat") {
    TypeSpec spec{1, 1, 1, false, false, false, true};
    auto g = generate_game(spec, 21);
    auto plan = oracle_solve(g);
    bool saw_cook = false;
    for (const auto& a : plan) {
        if (a.rfind("cook ", 0) == 0) saw_cook = true;
    }
    CHECK(saw_cook);
    CHECK(plan.back() == "eat meal");
}

TEST_CASE("needs_open games put something closed on the oracle path") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        TypeSpec spec{1, 1, 1, true, false, false, false};
        auto g = generate_game(spec, seed);
        auto plan = oracle_solve(g);
        bool saw_open = false;
        for (const auto& a : plan) {
            if (a.rfind("open ", 0) == 0) saw_open = true;
        }
        CHECK(saw_open);
    }
    // multi-room variant
    TypeSpec spec6{2, 6, 0, true, false, false, false};
    auto g = generate_game(spec6, 17);
    auto plan = oracle_solve(g);
    bool saw_open = false;
    for (const auto& a : plan) {
        if (a.rfind("open ", 0) == 0) saw_open = true;
    }
    CHECK(saw_open);
}

TEST_CASE("needs_drop games force a drop on the oracle path") {
    TypeSpec spec{3, 9, 3, false, true, false, false};
    auto g = generate_game(spec, 31);
    CHECK(g.inventory_capacity == 3);
    auto plan = oracle_solve(g);
    bool saw_drop = false;
    for (const auto& a : plan) {
        if (a.rfind("drop ", 0) == 0) saw_drop = true;
    }
    CHECK(saw_drop);
}

TEST_CASE("splits: one game per type in each test set, dev and train from the rest") {
    FamilyConfig cfg;
    cfg.types_per_tier = {2, 0, 0, 0, 0, 0};
    cfg.games_per_type = 3;
    cfg.seed = 7;
    auto set = generate_family(cfg);
    REQUIRE(set.games.size() == 6);
    auto s = split_sets(set, 1, 50);
    CHECK(s.test1.size() == 2);
    CHECK(s.test2.size() == 2);
    CHECK(s.dev.size() == 1);
    CHECK(s.train.size() == 1);

    std::set<std::string> all;
    for (const auto& part : {s.train, s.dev, s.test1, s.test2}) {
        for (const auto& id : part) CHECK(all.insert(id).second);  // disjoint
    }
    CHECK(all.size() == 6);

    auto again = split_sets(set, 1, 50);
    CHECK(again.train == s.train);
    CHECK(again.dev == s.dev);
    CHECK(again.test1 == s.test1);
    CHECK(again.test2 == s.test2);
}

TEST_CASE("splits reject types with fewer than three games and oversized dev") {
    FamilyConfig cfg;
    cfg.types_per_tier = {1, 0, 0, 0, 0, 0};
    cfg.games_per_type = 2;
    cfg.seed = 7;
    auto set = generate_family(cfg);
    CHECK_THROWS_AS(split_sets(set, 0, 1), DataError);

    cfg.games_per_type = 3;
    auto set2 = generate_family(cfg);
    CHECK_THROWS_AS(split_sets(set2, 1, 1), DataError);  // nothing left for train
}

TEST_CASE("tier reports are stable under a fixed seed") {
    FamilyConfig cfg;
    cfg.types_per_tier = {2, 2, 2, 2, 2, 2};
    cfg.games_per_type = 3;
    cfg.seed = 1212;
    auto a = tier_reports(generate_family(cfg));
    auto b = tier_reports(generate_family(cfg));
    REQUIRE(a.size() == 6);
    for (std::size_t t = 0; t < 6; ++t) {
        CHECK(a[t].types == 2);
        CHECK(a[t].games == 6);
        CHECK(a[t].max_score_total == b[t].max_score_total);
        CHECK(a[t].max_score_total > 0);
    }
}

TEST_CASE("tier spec enumeration matches the tier invariants") {
    for (int tier = 1; tier <= 6; ++tier) {
        auto specs = enumerate_tier_specs(tier);
        CHECK(!specs.empty());
        for (const auto& s : specs) {
            CHECK(s.tier() == tier);
            if (tier <= 3) {
                CHECK(s.room_count == 1);
                CHECK(s.recipe_size == tier);
            } else {
                CHECK(s.room_count == (tier == 4 ? 6 : tier == 5 ? 9 : 12));
                CHECK(s.recipe_size <= 3);
            }
        }
    }
    // paper-scale selection: 21/21/21 + 53/53/53 = 222 types
    CHECK(select_tier_specs(1, 21).size() == 21);
    CHECK(select_tier_specs(6, 53).size() == 53);
    CHECK_THROWS_AS(select_tier_specs(1, 1000), ConfigError);
}

TEST_CASE("paper-scale configuration yields 4440 games across 222 types") {
    FamilyConfig cfg;
    cfg.types_per_tier = {21, 21, 21, 53, 53, 53};
    cfg.games_per_type = 20;
    cfg.seed = 2024;
    auto set = generate_family(cfg);
    CHECK(set.games.size() == 4440);
    std::set<std::string> types;
    for (const auto& g : set.games) types.insert(g.spec.key());
    CHECK(types.size() == 222);
    auto reports = tier_reports(set);
    long long grand = 0;
    for (const auto& r : reports) {
        CHECK(r.games == r.types * 20);
        CHECK(r.max_score_total > 0);
        grand += r.max_score_total;
    }
    // analogous to the published per-tier max-score totals; ballpark sanity only
    CHECK(grand > 4440);

    auto splits = split_sets(set, 400, 9);
    CHECK(splits.test1.size() == 222);
    CHECK(splits.test2.size() == 222);
    CHECK(splits.dev.size() == 400);
    CHECK(splits.train.size() == 4440 - 222 - 222 - 400);
}

TEST_CASE("game files round-trip exactly") {
    TypeSpec spec{3, 12, 2, true, true, true, true};
    auto g = generate_game(spec, 77);
    auto text = game_to_text(g);
    auto g2 = game_from_text(text);
    CHECK(game_to_text(g2) == text);

    auto path = std::filesystem::temp_directory_path() / "cookbench_game_test.json";
    save_game(g, path.string());
    auto g3 = load_game(path.string());
    CHECK(game_to_text(g3) == text);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(game_from_text("{\"format\": \"other\"}"), DataError);
    CHECK_THROWS_AS(game_from_text("not json at all"), DataError);
}
