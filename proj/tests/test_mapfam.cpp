#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "cookbench/engine.hpp"
#include "cookbench/gamegen.hpp"
#include "cookbench/mapfam.hpp"
#include "cookbench/rollout.hpp"

using namespace cookbench;
using namespace cookbench::mapfam;
using gamegen::Direction;

TEST_CASE("knowledge graph records edges idempotently and rejects contradictions") {
    KnowledgeGraph kg;
    kg.observe("hallway", Direction::east, "bedroom");
    CHECK(kg.edge_count() == 1);
    kg.observe("hallway", Direction::east, "bedroom");  // re-record: unchanged
    CHECK(kg.edge_count() == 1);
    CHECK(kg.destination("hallway", Direction::east) == "bedroom");
    CHECK(!kg.destination("hallway", Direction::west));
    CHECK_THROWS_AS(kg.observe("hallway", Direction::east, "garden"), KgContradiction);
}

TEST_CASE("oracle walk of a six-room game covers every traversed edge") {
    gamegen::TypeSpec spec{2, 6, 2, false, false, false, false};
    auto g = gamegen::generate_game(spec, 606);
    auto plan = gamegen::oracle_solve(g);

    KnowledgeGraph kg;
    auto [state, obs] = engine::reset(g);
    std::set<std::pair<std::string, int>> traversed;
    for (const auto& a : plan) {
        std::string before = g.rooms[static_cast<std::size_t>(state.current_room)].name;
        engine::step(state, a);
        if (a.rfind("go ", 0) == 0) {
            auto d = gamegen::direction_from_string(a.substr(3));
            REQUIRE(d);
            std::string after = g.rooms[static_cast<std::size_t>(state.current_room)].name;
            kg.observe(before, *d, after);
            traversed.insert({before, static_cast<int>(*d)});
        }
    }
    CHECK(kg.edge_count() == traversed.size());
    CHECK(kg.edge_count() > 0);
}

TEST_CASE("go-room augments known directions with their destination") {
    KnowledgeGraph kg;
    kg.observe("hallway", Direction::east, "bedroom");
    std::vector<std::string> actions = {"go east", "go west", "take knife"};
    auto out = augment_actions(actions, kg, "hallway", GoStrategy::go_room);
    REQUIRE(out.size() == 3);
    CHECK(out[0].encoded == "go east to bedroom");
    CHECK(out[0].engine_action == "go east");
    CHECK(out[1].encoded == "go west");  // unknown destination stays bare
    CHECK(out[2].encoded == "take knife");
    // partially built graphs never fail (spec: usable even when partial)
}

TEST_CASE("go-random conflates all go actions into one") {
    KnowledgeGraph kg;
    std::vector<std::string> actions = {"go north", "go south", "take knife"};
    auto out = augment_actions(actions, kg, "kitchen", GoStrategy::go_random);
    REQUIRE(out.size() == 2);
    CHECK(out[0].encoded == "go");
    CHECK(!out[0].engine_action);
    CHECK(out[1].encoded == "take knife");
}

TEST_CASE("go-cardinal is the identity on any action list") {
    KnowledgeGraph kg;
    kg.observe("kitchen", Direction::north, "pantry");
    std::vector<std::string> actions = {"examine cookbook", "go north", "open fridge", "prepare meal"};
    auto out = augment_actions(actions, kg, "kitchen", GoStrategy::go_cardinal);
    REQUIRE(out.size() == actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        CHECK(out[i].encoded == actions[i]);
        CHECK(out[i].engine_action == actions[i]);
    }
}

TEST_CASE("augmentation length bijection: same length except conflated go") {
    Rng rng(9);
    KnowledgeGraph kg;
    kg.observe("room", Direction::east, "other");
    for (int round = 0; round < 50; ++round) {
        std::vector<std::string> actions;
        int gos = static_cast<int>(rng.uniform_u64(4));
        for (int i = 0; i < gos; ++i) {
            actions.push_back(std::string("go ") + gamegen::to_string(gamegen::kDirections[static_cast<std::size_t>(
                                                       rng.uniform_u64(4))]));
        }
        int others = 1 + static_cast<int>(rng.uniform_u64(5));
        for (int i = 0; i < others; ++i) actions.push_back("take item" + std::to_string(i));
        std::sort(actions.begin(), actions.end());
        actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
        std::size_t n_go = 0;
        for (const auto& a : actions) n_go += a.rfind("go ", 0) == 0 ? 1 : 0;

        for (auto strat : {GoStrategy::go_cardinal, GoStrategy::go_room}) {
            CHECK(augment_actions(actions, kg, "room", strat).size() == actions.size());
        }
        auto collapsed = augment_actions(actions, kg, "room", GoStrategy::go_random);
        CHECK(collapsed.size() == actions.size() - n_go + (n_go > 0 ? 1 : 0));
    }
}

TEST_CASE("resolve_random_go: single exit deterministic, four exits roughly uniform") {
    Rng rng(123);
    CHECK(resolve_random_go({Direction::west}, rng) == Direction::west);

    std::vector<Direction> dirs = {Direction::north, Direction::south, Direction::east, Direction::west};
    std::array<int, 4> counts = {0, 0, 0, 0};
    const int n = 10000;
    for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(resolve_random_go(dirs, rng))] += 1;
    // binomial 3-sigma band around n/4
    double sigma = std::sqrt(n * 0.25 * 0.75);
    for (int c : counts) CHECK(std::fabs(c - n / 4.0) < 3 * sigma);

    CHECK_THROWS_AS(resolve_random_go({}, rng), std::logic_error);
}

TEST_CASE("familiarization walks only while exits are unknown and before step 50") {
    Rng rng(5);
    KnowledgeGraph kg;
    PlayerView view;
    view.room_name = "hallway";
    view.visible_exits = {Direction::east, Direction::west};
    view.admissible = {"go east", "go west", "open sliding door", "take apple"};

    for (int i = 0; i < 20; ++i) {
        auto a = familiarization_policy(view, kg, 3, rng);
        REQUIRE(a);
        CHECK((a->rfind("go ", 0) == 0 || a->rfind("open ", 0) == 0));
    }
    CHECK(!familiarization_policy(view, kg, kFamiliarizationSteps, rng));

    kg.observe("hallway", Direction::east, "bedroom");
    CHECK(familiarization_policy(view, kg, 3, rng));  // west still unknown
    kg.observe("hallway", Direction::west, "garden");
    CHECK(!familiarization_policy(view, kg, 3, rng));  // fully mapped room
}

TEST_CASE("familiarization walk increases map completeness on a nine-room game") {
    gamegen::TypeSpec spec{1, 9, 1, true, false, false, false};
    auto g = gamegen::generate_game(spec, 909);
    KnowledgeGraph kg;
    Rng rng(11);
    rollout::Episode episode(g, GoStrategy::go_room, &kg, nullptr);
    std::size_t before = kg.edge_count();
    int walked = 0;
    while (episode.running()) {
        auto a = familiarization_policy(episode.view(), kg, episode.steps_taken(), rng);
        if (!a) break;
        episode.apply_engine_action(*a);
        ++walked;
    }
    CHECK(walked > 0);
    CHECK(kg.edge_count() > before);
    CHECK(episode.steps_taken() <= kFamiliarizationSteps);
}
