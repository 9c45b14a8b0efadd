#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cookbench/engine.hpp"
#include "cookbench/gamegen.hpp"
#include "cookbench/mapfam.hpp"
#include "cookbench/rng.hpp"
#include "cookbench/textenc.hpp"

namespace cookbench::rollout {

// One episode of one game: engine state, bounded trajectory, strategy-specific
// action augmentation and knowledge-graph bookkeeping in a single place.
class Episode {
public:
    Episode(const gamegen::Game& game, mapfam::GoStrategy strategy, mapfam::KnowledgeGraph* kg,
            const textenc::Vocab* vocab);

    bool running() const { return state_.running(); }
    const engine::GameState& state() const { return state_; }
    const gamegen::Game& game() const { return *game_; }
    int raw_score() const { return state_.raw_score; }
    int steps_taken() const { return state_.steps_taken; }

    const std::vector<mapfam::AugmentedAction>& candidates() const { return candidates_; }
    std::vector<std::int32_t> state_token_ids() const;
    std::vector<std::vector<std::int32_t>> candidate_token_ids() const;

    mapfam::PlayerView view() const;

    // Applies the candidate at the given index; a conflated "go" resolves to a
    // uniformly random admissible direction.
    engine::StepResult apply(std::size_t candidate_index, Rng& rng);

    // Applies a concrete engine action (used by the familiarization walk).
    engine::StepResult apply_engine_action(const std::string& action);

private:
    engine::StepResult finish_step(const std::string& engine_action, const std::string& encoded_action);
    void refresh_candidates();

    const gamegen::Game* game_;
    mapfam::GoStrategy strategy_;
    mapfam::KnowledgeGraph* kg_;
    const textenc::Vocab* vocab_;
    engine::GameState state_;
    textenc::Trajectory trajectory_;
    std::vector<std::string> admissible_;
    std::vector<mapfam::AugmentedAction> candidates_;
};

}  // namespace cookbench::rollout
