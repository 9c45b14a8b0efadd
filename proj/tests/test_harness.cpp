#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cookbench/harness.hpp"
#include "cookbench/engine.hpp"

using namespace cookbench;
using namespace cookbench::harness;

namespace {

struct World {
    gamegen::GameSet set;
    std::vector<const gamegen::Game*> games;
    textenc::Vocab vocab;

    explicit World(std::uint64_t seed) {
        gamegen::FamilyConfig cfg;
        cfg.types_per_tier = {1, 1, 0, 1, 0, 0};
        cfg.games_per_type = 2;
        cfg.seed = seed;
        set = gamegen::generate_family(cfg);
        for (const auto& g : set.games) games.push_back(&g);
        std::vector<std::string> words;
        for (const auto& g : set.games) {
            auto lex = engine::text_lexicon(g);
            words.insert(words.end(), lex.begin(), lex.end());
        }
        vocab = textenc::Vocab::build(words);
    }
};

neural::QNetworkParams<float> tiny_model(const World& w) {
    neural::NetConfig net;
    net.vocab_size = static_cast<std::int32_t>(w.vocab.size());
    net.embed_dim = 8;
    net.conv_widths = {2, 3};
    net.filters_per_width = 4;
    net.recurrent_units = 6;
    return neural::QNetworkParams<float>::init(net, 77);
}

}  // namespace

TEST_CASE("random-policy evaluation produces a consistent points-weighted report") {
    World w(1818);
    EvalConfig cfg;
    cfg.policy = evalpol::Policy::random_action;
    cfg.strategy = mapfam::GoStrategy::go_cardinal;
    cfg.episodes = 10;
    cfg.seed = 3;
    auto report = evaluate(nullptr, nullptr, w.games, cfg);

    REQUIRE(report.ledger.size() == w.games.size());
    long long earned = 0, achievable = 0;
    for (const auto& l : report.ledger) {
        REQUIRE(l.episode_scores.size() == 10);
        for (int s : l.episode_scores) {
            CHECK(s >= 0);
            CHECK(s <= l.max_score);
            earned += s;
        }
        achievable += 10LL * l.max_score;
    }
    CHECK(report.overall.points_earned == earned);
    CHECK(report.overall.points_achievable == achievable);
    CHECK(report.overall.percentage ==
          doctest::Approx(100.0 * static_cast<double>(earned) / static_cast<double>(achievable)));
    CHECK(report.overall.percentage >= 0.0);
    CHECK(report.overall.percentage <= 100.0);

    // overall is points-weighted, not the mean of tier percentages
    long long tier_earned = 0, tier_achievable = 0;
    for (const auto& t : report.tiers) {
        tier_earned += t.points_earned;
        tier_achievable += t.points_achievable;
    }
    CHECK(tier_earned == report.overall.points_earned);
    CHECK(tier_achievable == report.overall.points_achievable);
}

TEST_CASE("evaluation is deterministic for a fixed seed") {
    World w(1919);
    EvalConfig cfg;
    cfg.policy = evalpol::Policy::random_action;
    cfg.episodes = 4;
    cfg.seed = 11;
    auto a = evaluate(nullptr, nullptr, w.games, cfg);
    auto b = evaluate(nullptr, nullptr, w.games, cfg);
    REQUIRE(a.ledger.size() == b.ledger.size());
    for (std::size_t i = 0; i < a.ledger.size(); ++i) {
        CHECK(a.ledger[i].episode_scores == b.ledger[i].episode_scores);
    }
    // parallel evaluation gives the same result as serial
    cfg.workers = 2;
    auto c = evaluate(nullptr, nullptr, w.games, cfg);
    for (std::size_t i = 0; i < a.ledger.size(); ++i) {
        CHECK(a.ledger[i].episode_scores == c.ledger[i].episode_scores);
    }
}

TEST_CASE("model-backed policies run and stay within score bounds") {
    World w(2020);
    auto model = tiny_model(w);
    for (auto policy : {evalpol::Policy::greedy, evalpol::Policy::epsilon, evalpol::Policy::sampling,
                        evalpol::Policy::linucb}) {
        EvalConfig cfg;
        cfg.policy = policy;
        cfg.strategy = policy == evalpol::Policy::linucb ? mapfam::GoStrategy::go_room
                                                         : mapfam::GoStrategy::go_random;
        cfg.episodes = 2;
        cfg.seed = 21;
        auto report = evaluate(&model, &w.vocab, w.games, cfg);
        CHECK(report.overall.points_achievable > 0);
        CHECK(report.overall.percentage >= 0.0);
        CHECK(report.overall.percentage <= 100.0);
    }
}

TEST_CASE("policies that need a model refuse to run without one") {
    World w(2121);
    EvalConfig cfg;
    cfg.policy = evalpol::Policy::greedy;
    CHECK_THROWS_AS(evaluate(nullptr, nullptr, w.games, cfg), ConfigError);
}

TEST_CASE("report formatting contains tier rows and machine-readable lines") {
    World w(2222);
    EvalConfig cfg;
    cfg.policy = evalpol::Policy::random_action;
    cfg.episodes = 3;
    cfg.seed = 5;
    auto report = evaluate(nullptr, nullptr, w.games, cfg);
    auto table = format_report_table(report, "test report");
    CHECK(table.find("tier") != std::string::npos);
    CHECK(table.find("all") != std::string::npos);
    auto lines = format_report_lines(report, "random/test1");
    CHECK(lines.find("report\tlabel=random/test1\ttier=1") != std::string::npos);
    CHECK(lines.find("tier=all") != std::string::npos);
}
