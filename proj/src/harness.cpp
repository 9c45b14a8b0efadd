#include "cookbench/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cookbench/rollout.hpp"
#include "cookbench/util.hpp"

namespace cookbench::harness {

namespace {

using evalpol::BanditState;
using evalpol::Policy;
using gamegen::Game;
using mapfam::GoStrategy;
using neural::QNetworkParams;

GameLedger play_game(const QNetworkParams<float>* model, const textenc::Vocab* vocab, const Game& game,
                     const EvalConfig& cfg) {
    GameLedger ledger;
    ledger.game_id = game.id;
    ledger.tier = game.tier;
    ledger.max_score = game.max_score;

    Rng rng(derive_seed(cfg.seed, fnv1a64(game.id)));
    mapfam::KnowledgeGraph kg;
    const int bandit_dim = model ? model->cfg.state_dim() : 1;
    BanditState bandit(bandit_dim, cfg.bandit_lambda);

    const bool needs_model = cfg.policy != Policy::random_action;
    if (needs_model && (!model || !vocab)) {
        throw ConfigError("policy " + std::string(evalpol::to_string(cfg.policy)) +
                          " needs a trained checkpoint and vocabulary");
    }

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        if (cfg.bandit_reset_per_episode) bandit = BanditState(bandit_dim, cfg.bandit_lambda);
        rollout::Episode episode(game, cfg.strategy, &kg, vocab);
        while (episode.running() && episode.steps_taken() < cfg.max_steps) {
            // map familiarization happens before normal play when the strategy
            // relies on the knowledge graph
            if (cfg.strategy == GoStrategy::go_room) {
                auto walk = mapfam::familiarization_policy(episode.view(), kg, episode.steps_taken(), rng);
                if (walk) {
                    episode.apply_engine_action(*walk);
                    continue;
                }
            }
            const auto& candidates = episode.candidates();
            if (candidates.empty()) break;
            std::size_t choice = 0;
            if (cfg.policy == Policy::random_action) {
                choice = rng.uniform_u64(candidates.size());
            } else {
                auto state_ids = episode.state_token_ids();
                auto action_ids = episode.candidate_token_ids();
                auto h_s_f = neural::encode_state(*model, std::span<const std::int32_t>(state_ids));
                std::vector<std::vector<float>> h_as;
                h_as.reserve(action_ids.size());
                for (const auto& a : action_ids) {
                    h_as.push_back(neural::encode_action(*model, std::span<const std::int32_t>(a)));
                }
                auto q_f = neural::q_values(*model, std::span<const float>(h_s_f), h_as);
                std::vector<double> q(q_f.begin(), q_f.end());

                switch (cfg.policy) {
                    case Policy::greedy: choice = evalpol::greedy_select(q); break;
                    case Policy::epsilon: choice = evalpol::eps_select(q, cfg.epsilon, rng); break;
                    case Policy::sampling: choice = evalpol::gumbel_select(q, cfg.temperature, rng); break;
                    case Policy::linucb: {
                        std::vector<double> h_s(h_s_f.begin(), h_s_f.end());
                        std::vector<std::string> keys;
                        keys.reserve(candidates.size());
                        for (const auto& c : candidates) keys.push_back(c.encoded);
                        choice = evalpol::linucb_select(q, h_s, keys, bandit);
                        bandit.update(keys[choice], h_s);
                        break;
                    }
                    case Policy::random_action: break;
                }
            }
            episode.apply(choice, rng);
        }
        ledger.episode_scores.push_back(episode.raw_score());
        ledger.episode_steps.push_back(episode.steps_taken());
    }
    return ledger;
}

// 0.95 two-sided Student t quantiles for n-1 degrees of freedom
double t_quantile_975(int dof) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                   2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086};
    if (dof < 1) return 0.0;
    if (dof <= 20) return table[dof - 1];
    return 1.96;
}

// Confidence half-width over the episode axis: one percentage sample per
// episode index, aggregated over the games of the group.
double episode_ci(const std::vector<const GameLedger*>& group, int episodes) {
    if (episodes < 2) return 0.0;
    std::vector<double> samples;
    for (int e = 0; e < episodes; ++e) {
        long long earned = 0, achievable = 0;
        for (const auto* l : group) {
            if (e < static_cast<int>(l->episode_scores.size())) {
                earned += l->episode_scores[static_cast<std::size_t>(e)];
                achievable += l->max_score;
            }
        }
        if (achievable > 0) samples.push_back(100.0 * static_cast<double>(earned) / static_cast<double>(achievable));
    }
    if (samples.size() < 2) return 0.0;
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size() - 1);
    return t_quantile_975(static_cast<int>(samples.size()) - 1) * std::sqrt(var / static_cast<double>(samples.size()));
}

TierScore summarize(int tier, const std::vector<const GameLedger*>& group, int episodes) {
    TierScore t;
    t.tier = tier;
    t.games = static_cast<int>(group.size());
    for (const auto* l : group) {
        for (int s : l->episode_scores) t.points_earned += s;
        for (int s : l->episode_steps) t.steps_taken += s;
        t.points_achievable += static_cast<long long>(l->max_score) * static_cast<long long>(l->episode_scores.size());
    }
    t.percentage = t.points_achievable > 0
                       ? 100.0 * static_cast<double>(t.points_earned) / static_cast<double>(t.points_achievable)
                       : 0.0;
    t.ci_half_width = episode_ci(group, episodes);
    return t;
}

}  // namespace

ScoreReport evaluate(const QNetworkParams<float>* model, const textenc::Vocab* vocab,
                     const std::vector<const Game*>& games, const EvalConfig& config) {
    if (games.empty()) throw DataError("evaluate: no games given");
    ScoreReport report;
    report.ledger.resize(games.size());
    parallel_for(games.size(), config.workers, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t i = begin; i < end; ++i) {
            report.ledger[i] = play_game(model, vocab, *games[i], config);
        }
    });

    std::map<int, std::vector<const GameLedger*>> by_tier;
    std::vector<const GameLedger*> all;
    for (const auto& l : report.ledger) {
        by_tier[l.tier].push_back(&l);
        all.push_back(&l);
    }
    for (const auto& [tier, group] : by_tier) {
        report.tiers.push_back(summarize(tier, group, config.episodes));
    }
    report.overall = summarize(0, all, config.episodes);
    return report;
}

std::string format_report_table(const ScoreReport& report, const std::string& title) {
    std::ostringstream out;
    out << title << "\n";
    out << "tier  games  score%   ±CI     earned/achievable  steps\n";
    char buf[128];
    for (const auto& t : report.tiers) {
        std::snprintf(buf, sizeof(buf), "%-5d %-6d %6.1f  ±%-5.1f  %8lld/%-10lld %lld\n", t.tier, t.games,
                      t.percentage, t.ci_half_width, t.points_earned, t.points_achievable, t.steps_taken);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-5s %-6d %6.1f  ±%-5.1f  %8lld/%-10lld %lld\n", "all",
                  report.overall.games, report.overall.percentage, report.overall.ci_half_width,
                  report.overall.points_earned, report.overall.points_achievable, report.overall.steps_taken);
    out << buf;
    return out.str();
}

std::string format_report_lines(const ScoreReport& report, const std::string& label) {
    std::ostringstream out;
    auto line = [&](const TierScore& t, const std::string& tier_name) {
        out << "report\tlabel=" << label << "\ttier=" << tier_name << "\tgames=" << t.games
            << "\tpct=" << t.percentage << "\tci=" << t.ci_half_width << "\tearned=" << t.points_earned
            << "\tachievable=" << t.points_achievable << "\tsteps=" << t.steps_taken << "\n";
    };
    for (const auto& t : report.tiers) line(t, std::to_string(t.tier));
    line(report.overall, "all");
    return out.str();
}

}  // namespace cookbench::harness
