#include "cookbench/drrn.hpp"

#include <algorithm>
#include <cstring>

#include "cookbench/rollout.hpp"
#include "cookbench/util.hpp"

namespace cookbench::drrn {

using neural::AdamState;
using neural::QNetworkParams;
using neural::Transition;

void ReplayMemory::store(Transition entry) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
    if (buffer_.size() < capacity_) {
        buffer_.push_back(std::move(entry));
    } else {
        buffer_[next_] = std::move(entry);  // FIFO eviction
        next_ = (next_ + 1) % capacity_;
    }
    ++inserted_;
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch, Rng& rng) const {
    if (batch > buffer_.size()) {
        throw DataError("replay memory holds " + std::to_string(buffer_.size()) + " entries, need " +
                        std::to_string(batch));
    }
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t idx : rng.sample_indices(buffer_.size(), batch)) out.push_back(buffer_[idx]);
    return out;
}

double epsilon_at(std::uint64_t step, double eps_start, double eps_end, std::uint64_t horizon) {
    if (horizon == 0 || step >= horizon) return eps_end;
    double frac = static_cast<double>(step) / static_cast<double>(horizon);
    return eps_start + (eps_end - eps_start) * frac;
}

std::size_t select_training_action(std::span<const double> q, double epsilon, Rng& rng) {
    if (q.empty()) throw DataError("select_training_action: no actions");
    if (rng.uniform_real() < epsilon) return rng.uniform_u64(q.size());
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best]) best = i;
    }
    return best;
}

std::uint64_t params_content_hash(const QNetworkParams<float>& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    params.for_each_tensor([&](const std::string& name, const neural::Tensor<float>& t) {
        h = mix_seed(h ^ fnv1a64(name));
        for (float v : t.data) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            h = mix_seed(h ^ bits);
        }
    });
    return h;
}

std::vector<CurriculumStageSpec> curriculum_schedule() {
    return {
        {"tier1", {1}},         {"tier1-2", {1, 2}}, {"tier1-3", {1, 2, 3}}, {"tier4", {4}},
        {"tier5", {5}},         {"tier6", {6}},      {"all", {1, 2, 3, 4, 5, 6}},
    };
}

Trainer::Trainer(const std::vector<gamegen::Game>& all_games, const gamegen::Splits& splits,
                 const textenc::Vocab& vocab, mapfam::GoStrategy strategy, const TrainConfig& config)
    : all_games_(&all_games), splits_(splits), vocab_(&vocab), strategy_(strategy), config_(config) {
    for (const auto& g : all_games) by_id_[g.id] = &g;
}

std::vector<const gamegen::Game*> Trainer::games_for_tiers(const std::vector<int>& tiers,
                                                           const std::vector<std::string>& ids) const {
    std::vector<const gamegen::Game*> out;
    for (const auto& id : ids) {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw DataError("split references unknown game id: " + id);
        if (std::find(tiers.begin(), tiers.end(), it->second->tier) != tiers.end()) out.push_back(it->second);
    }
    return out;
}

double Trainer::dev_evaluate(const QNetworkParams<float>& params, const std::vector<int>& tiers) {
    auto dev_games = games_for_tiers(tiers, splits_.dev);
    if (dev_games.empty()) dev_games = games_for_tiers({1, 2, 3, 4, 5, 6}, splits_.dev);
    if (dev_games.empty()) throw DataError("no dev games available for evaluation");
    if (static_cast<int>(dev_games.size()) > config_.dev_eval_cap) {
        dev_games.resize(static_cast<std::size_t>(config_.dev_eval_cap));
    }
    harness::EvalConfig ec;
    ec.policy = evalpol::Policy::greedy;  // dev selection uses the greedy argmax convention
    ec.strategy = strategy_;
    ec.episodes = config_.dev_eval_episodes;
    ec.seed = derive_seed(config_.seed, fnv1a64("dev-eval"));
    ec.workers = config_.workers;
    auto report = harness::evaluate(&params, vocab_, dev_games, ec);
    return report.overall.percentage;
}

StageResult Trainer::run_stage(const std::string& stage_name, const std::vector<int>& tiers,
                               QNetworkParams<float> init_params, AdamState<float> init_adam,
                               std::uint64_t epsilon_horizon, std::uint64_t start_env_step) {
    auto stage_games = games_for_tiers(tiers, splits_.train);
    if (stage_games.empty()) throw DataError("stage " + stage_name + " has no training games");

    StageResult result;
    result.stage = stage_name;
    result.init_params_hash = params_content_hash(init_params);

    QNetworkParams<float> params = std::move(init_params);
    QNetworkParams<float> target = params;
    AdamState<float> adam = std::move(init_adam);
    ReplayMemory replay(config_.replay_capacity);
    Rng rng(derive_seed(config_.seed, fnv1a64("stage-" + stage_name)));

    // knowledge graphs built from the agent's own transitions, one per game,
    // persisting across the stage's episodes
    std::map<std::string, mapfam::KnowledgeGraph> kgs;

    QNetworkParams<float> grads;
    neural::GradWorkspace<float> ws;
    neural::ActionEncodingCache<float> target_cache;

    std::uint64_t env_steps = start_env_step;
    std::uint64_t train_steps = 0;
    double last_loss = 0.0;
    double best_dev = -1.0;
    QNetworkParams<float> best_params = params;
    bool stop = false;

    auto run_dev_eval = [&]() {
        double dev = dev_evaluate(params, tiers);
        if (dev >= best_dev) {
            best_dev = dev;
            best_params = params;
        }
        if (progress_) {
            progress_(stage_name, env_steps, train_steps,
                      epsilon_at(env_steps, config_.epsilon_start, config_.epsilon_end, epsilon_horizon),
                      last_loss, dev, params, adam);
        }
        if (config_.early_stop_dev_pct >= 0.0 && dev >= config_.early_stop_dev_pct) stop = true;
    };

    while (env_steps < config_.stage_steps && !stop) {
        const gamegen::Game& game = *stage_games[rng.uniform_u64(stage_games.size())];
        rollout::Episode episode(game, strategy_, &kgs[game.id], vocab_);
        while (episode.running() && env_steps < config_.stage_steps && !stop) {
            const auto& candidates = episode.candidates();
            auto state_ids = episode.state_token_ids();
            auto candidate_ids = episode.candidate_token_ids();
            const double eps =
                epsilon_at(env_steps, config_.epsilon_start, config_.epsilon_end, epsilon_horizon);

            std::size_t choice;
            if (rng.uniform_real() < eps) {
                choice = rng.uniform_u64(candidates.size());
            } else {
                std::vector<double> q(candidates.size());
                auto h_s = neural::encode_state(params, std::span<const std::int32_t>(state_ids));
                std::vector<std::vector<float>> h_as;
                h_as.reserve(candidate_ids.size());
                for (const auto& a : candidate_ids) {
                    h_as.push_back(neural::encode_action(params, std::span<const std::int32_t>(a)));
                }
                auto qf = neural::q_values(params, std::span<const float>(h_s), h_as);
                for (std::size_t i = 0; i < qf.size(); ++i) q[i] = qf[i];
                choice = 0;
                for (std::size_t i = 1; i < q.size(); ++i) {
                    if (q[i] > q[choice]) choice = i;
                }
            }

            auto step_result = episode.apply(choice, rng);
            ++env_steps;

            Transition tr;
            tr.state_tokens = std::move(state_ids);
            tr.action_tokens = std::move(candidate_ids[choice]);
            tr.shaped_reward = step_result.shaped_reward;
            tr.terminal = step_result.done != engine::Progress::running;
            if (!tr.terminal) {
                tr.next_state_tokens = episode.state_token_ids();
                tr.next_action_tokens = episode.candidate_token_ids();
            }
            replay.store(std::move(tr));

            if (env_steps > config_.observation_steps &&
                replay.size() >= static_cast<std::size_t>(config_.batch_size)) {
                auto batch = replay.sample(static_cast<std::size_t>(config_.batch_size), rng);
                last_loss = neural::td_loss_and_grads(params, config_.target_sync_every == 0 ? params : target,
                                                      batch, config_.gamma, config_.workers, grads, ws,
                                                      config_.target_sync_every == 0 ? nullptr : &target_cache);
                neural::adam_step(params, grads, adam, config_.lr);
                ++train_steps;
                if (config_.target_sync_every != 0 && train_steps % config_.target_sync_every == 0) {
                    target = params;
                    target_cache.clear();
                }
                if (train_steps % config_.eval_every == 0) run_dev_eval();
            }
        }
    }

    // final evaluation so the retained best is never worse than the end state
    run_dev_eval();
    result.best_params = std::move(best_params);
    result.adam = std::move(adam);
    result.best_dev_pct = best_dev;
    result.final_dev_pct = dev_evaluate(result.best_params, tiers);
    result.env_steps = env_steps;
    result.train_steps = train_steps;
    result.best_params_hash = params_content_hash(result.best_params);
    if (stage_done_) stage_done_(result);
    return result;
}

StageResult Trainer::run_curriculum() {
    neural::NetConfig net_cfg = config_.net;
    net_cfg.vocab_size = static_cast<std::int32_t>(vocab_->size());
    QNetworkParams<float> params =
        QNetworkParams<float>::init(net_cfg, derive_seed(config_.seed, fnv1a64("init")));
    AdamState<float> adam = AdamState<float>::zeros(net_cfg);

    StageResult last;
    bool first = true;
    for (const auto& stage : curriculum_schedule()) {
        auto init = first ? params : last.best_params;
        auto init_adam = first ? adam : last.adam;
        last = run_stage(stage.name, stage.tiers, std::move(init), std::move(init_adam),
                         config_.epsilon_horizon);
        first = false;
    }
    return last;
}

StageResult Trainer::run_mixed() {
    neural::NetConfig net_cfg = config_.net;
    net_cfg.vocab_size = static_cast<std::int32_t>(vocab_->size());
    QNetworkParams<float> params =
        QNetworkParams<float>::init(net_cfg, derive_seed(config_.seed, fnv1a64("init")));
    AdamState<float> adam = AdamState<float>::zeros(net_cfg);
    return run_stage("mixed", {1, 2, 3, 4, 5, 6}, std::move(params), std::move(adam),
                     config_.mixed_epsilon_horizon);
}

}  // namespace cookbench::drrn
