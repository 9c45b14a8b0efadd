#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cookbench/evalpol.hpp"
#include "cookbench/gamegen.hpp"
#include "cookbench/mapfam.hpp"
#include "cookbench/neural.hpp"
#include "cookbench/textenc.hpp"

namespace cookbench::harness {

struct EvalConfig {
    evalpol::Policy policy = evalpol::Policy::greedy;
    mapfam::GoStrategy strategy = mapfam::GoStrategy::go_room;
    int episodes = 10;
    int max_steps = 100;  // the engine enforces its own cap as well
    double epsilon = evalpol::kDefaultEvalEpsilon;
    double temperature = evalpol::kDefaultTemperature;
    double bandit_lambda = 1.0;
    bool bandit_reset_per_episode = false;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct GameLedger {
    std::string game_id;
    int tier = 0;
    int max_score = 0;
    std::vector<int> episode_scores;  // raw scores only
    std::vector<int> episode_steps;
};

struct TierScore {
    int tier = 0;
    int games = 0;
    long long points_earned = 0;       // summed over episodes
    long long points_achievable = 0;   // max_score * episodes, summed over games
    double percentage = 0.0;           // 100 * earned / achievable
    double ci_half_width = 0.0;        // 0.95 confidence over the episode axis
    long long steps_taken = 0;
};

struct ScoreReport {
    std::vector<TierScore> tiers;  // only tiers that appear
    TierScore overall;             // points-weighted, not a mean of tier rows
    std::vector<GameLedger> ledger;
};

// Zero-shot evaluation: per game, a fresh knowledge graph (built by the
// familiarization walk when the strategy needs it) and a fresh bandit that
// persists across the game's episodes. Raw scores only.
ScoreReport evaluate(const neural::QNetworkParams<float>* model, const textenc::Vocab* vocab,
                     const std::vector<const gamegen::Game*>& games, const EvalConfig& config);

std::string format_report_table(const ScoreReport& report, const std::string& title);
std::string format_report_lines(const ScoreReport& report, const std::string& label);

}  // namespace cookbench::harness
