#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cookbench/gamegen.hpp"
#include "cookbench/harness.hpp"
#include "cookbench/mapfam.hpp"
#include "cookbench/neural.hpp"
#include "cookbench/rng.hpp"
#include "cookbench/textenc.hpp"

namespace cookbench::drrn {

// Bounded FIFO transition store with uniform batch sampling (no replacement
// within a batch).
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {}

    void store(neural::Transition entry);
    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t inserted() const { return inserted_; }
    const neural::Transition& at(std::size_t i) const { return buffer_[i]; }

    // size() must be at least batch; callers wait until the memory has filled
    std::vector<neural::Transition> sample(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::uint64_t inserted_ = 0;
    std::size_t next_ = 0;  // ring cursor once full
    std::vector<neural::Transition> buffer_;
};

struct TrainConfig {
    std::uint64_t observation_steps = 50000;
    std::size_t replay_capacity = 500000;
    int batch_size = 32;
    double lr = 1e-5;
    double gamma = 0.9;
    double epsilon_start = 1.0;
    double epsilon_end = 1e-4;
    std::uint64_t epsilon_horizon = 2000000;        // per curriculum stage
    std::uint64_t mixed_epsilon_horizon = 10000000; // single mixed stage
    std::uint64_t stage_steps = 2000000;            // environment steps per stage
    std::uint64_t target_sync_every = 1000;         // train steps; 0 disables the frozen target
    std::uint64_t eval_every = 10000;               // train steps between dev evaluations
    int dev_eval_cap = 40;
    int dev_eval_episodes = 3;
    double early_stop_dev_pct = -1.0;  // stop a stage early at this dev percentage; <0 disables
    int workers = 1;
    std::uint64_t seed = 1;
    // network shape template; vocab_size is filled in from the vocabulary
    neural::NetConfig net;
};

// Linear decay from epsilon_start at step 0 to epsilon_end at the horizon,
// clamped afterwards.
double epsilon_at(std::uint64_t step, double eps_start, double eps_end, std::uint64_t horizon);
inline double epsilon_at(std::uint64_t step, const TrainConfig& cfg) {
    return epsilon_at(step, cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_horizon);
}

// Uniform random with probability epsilon, otherwise argmax with lowest-index
// tie break.
std::size_t select_training_action(std::span<const double> q, double epsilon, Rng& rng);

std::uint64_t params_content_hash(const neural::QNetworkParams<float>& params);

struct StageResult {
    std::string stage;
    neural::QNetworkParams<float> best_params;
    neural::AdamState<float> adam;
    double best_dev_pct = -1.0;
    double final_dev_pct = -1.0;
    std::uint64_t env_steps = 0;
    std::uint64_t train_steps = 0;
    std::uint64_t init_params_hash = 0;
    std::uint64_t best_params_hash = 0;
};

struct CurriculumStageSpec {
    std::string name;
    std::vector<int> tiers;  // which tiers' training games this stage uses
};

// tier1, tier1-2, tier1-3, tier4, tier5, tier6, then an all-tier fine-tune
std::vector<CurriculumStageSpec> curriculum_schedule();

class Trainer {
public:
    Trainer(const std::vector<gamegen::Game>& all_games, const gamegen::Splits& splits,
            const textenc::Vocab& vocab, mapfam::GoStrategy strategy, const TrainConfig& config);

    // Called after every dev evaluation with the live parameters, so callers
    // can checkpoint: (stage, env_steps, train_steps, eps, loss, dev_pct, params, adam)
    using ProgressFn = std::function<void(const std::string&, std::uint64_t, std::uint64_t, double, double,
                                          double, const neural::QNetworkParams<float>&,
                                          const neural::AdamState<float>&)>;
    void set_progress(ProgressFn fn) { progress_ = std::move(fn); }
    // Called when a stage finishes with its best params (for checkpointing).
    using StageDoneFn = std::function<void(const StageResult&)>;
    void set_stage_done(StageDoneFn fn) { stage_done_ = std::move(fn); }

    StageResult run_stage(const std::string& stage_name, const std::vector<int>& tiers,
                          neural::QNetworkParams<float> init_params, neural::AdamState<float> init_adam,
                          std::uint64_t epsilon_horizon, std::uint64_t start_env_step = 0);

    StageResult run_curriculum();
    StageResult run_mixed();

    const TrainConfig& config() const { return config_; }

private:
    std::vector<const gamegen::Game*> games_for_tiers(const std::vector<int>& tiers,
                                                      const std::vector<std::string>& ids) const;
    double dev_evaluate(const neural::QNetworkParams<float>& params, const std::vector<int>& tiers);

    const std::vector<gamegen::Game>* all_games_;
    std::map<std::string, const gamegen::Game*> by_id_;
    gamegen::Splits splits_;
    const textenc::Vocab* vocab_;
    mapfam::GoStrategy strategy_;
    TrainConfig config_;
    ProgressFn progress_;
    StageDoneFn stage_done_;
};

}  // namespace cookbench::drrn
