#include "cookbench/rollout.hpp"

#include <stdexcept>

namespace cookbench::rollout {

using gamegen::Direction;

Episode::Episode(const gamegen::Game& game, mapfam::GoStrategy strategy, mapfam::KnowledgeGraph* kg,
                 const textenc::Vocab* vocab)
    : game_(&game), strategy_(strategy), kg_(kg), vocab_(vocab) {
    auto [state, obs] = engine::reset(game);
    state_ = std::move(state);
    trajectory_.append_system(obs);
    refresh_candidates();
}

void Episode::refresh_candidates() {
    if (!state_.running()) {
        admissible_.clear();
        candidates_.clear();
        return;
    }
    admissible_ = engine::admissible_actions(state_);
    const std::string& room = game_->rooms[static_cast<std::size_t>(state_.current_room)].name;
    static const mapfam::KnowledgeGraph empty_kg;
    candidates_ = mapfam::augment_actions(admissible_, kg_ ? *kg_ : empty_kg, room, strategy_);
}

std::vector<std::int32_t> Episode::state_token_ids() const {
    if (!vocab_) throw std::logic_error("Episode: no vocabulary attached");
    return trajectory_.token_ids(*vocab_);
}

std::vector<std::vector<std::int32_t>> Episode::candidate_token_ids() const {
    if (!vocab_) throw std::logic_error("Episode: no vocabulary attached");
    std::vector<std::vector<std::int32_t>> out;
    out.reserve(candidates_.size());
    for (const auto& c : candidates_) out.push_back(vocab_->encode(textenc::tokenize(c.encoded)));
    return out;
}

mapfam::PlayerView Episode::view() const {
    mapfam::PlayerView v;
    v.room_name = game_->rooms[static_cast<std::size_t>(state_.current_room)].name;
    v.visible_exits = engine::visible_exits(state_);
    v.admissible = admissible_;
    return v;
}

engine::StepResult Episode::apply(std::size_t candidate_index, Rng& rng) {
    if (candidate_index >= candidates_.size()) throw std::logic_error("Episode: candidate index out of range");
    const auto& cand = candidates_[candidate_index];
    std::string engine_action;
    if (cand.engine_action) {
        engine_action = *cand.engine_action;
    } else {
        // conflated "go": pick a direction uniformly among admissible ones
        std::vector<Direction> dirs;
        for (const auto& a : admissible_) {
            if (a.rfind("go ", 0) == 0) {
                if (auto d = gamegen::direction_from_string(a.substr(3))) dirs.push_back(*d);
            }
        }
        engine_action = std::string("go ") + gamegen::to_string(mapfam::resolve_random_go(dirs, rng));
    }
    return finish_step(engine_action, cand.encoded);
}

engine::StepResult Episode::apply_engine_action(const std::string& action) {
    return finish_step(action, action);
}

engine::StepResult Episode::finish_step(const std::string& engine_action, const std::string& encoded_action) {
    const std::string room_before = game_->rooms[static_cast<std::size_t>(state_.current_room)].name;
    auto result = engine::step(state_, engine_action);
    if (kg_ && engine_action.rfind("go ", 0) == 0) {
        if (auto d = gamegen::direction_from_string(engine_action.substr(3))) {
            const std::string& room_after = game_->rooms[static_cast<std::size_t>(state_.current_room)].name;
            kg_->observe(room_before, *d, room_after);
        }
    }
    trajectory_.append_turn(result.observation, encoded_action);
    refresh_candidates();
    return result;
}

}  // namespace cookbench::rollout
