#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cookbench/gamegen.hpp"

namespace cookbench::engine {

using gamegen::CookState;
using gamegen::CutState;
using gamegen::Direction;
using gamegen::Game;

enum class Progress : int { running = 0, won = 1, lost = 2 };

// floor(room) / container / inventory / consumed (melted into the meal)
struct ItemState {
    enum class Where : int { room_floor = 0, container = 1, inventory = 2, consumed = 3 };
    Where where = Where::room_floor;
    int room = -1;
    int container = -1;
    CutState cut = CutState::none;
    CookState cook = CookState::none;
    bool acquired = false;  // first-take bookkeeping for scored acquisitions
};

struct GameState {
    const Game* game = nullptr;
    int current_room = 0;
    int steps_taken = 0;
    int raw_score = 0;
    Progress done = Progress::running;
    bool recipe_read = false;
    bool meal_prepared = false;
    std::vector<ItemState> items;
    std::vector<bool> door_open;
    std::vector<bool> container_open;

    bool running() const { return done == Progress::running; }
};

struct StepResult {
    std::string observation;
    int raw_reward = 0;
    double shaped_reward = 0.0;
    Progress done = Progress::running;
    std::vector<std::string> admissible;  // empty once terminal
};

struct InadmissibleAction : std::logic_error {
    explicit InadmissibleAction(const std::string& m) : std::logic_error(m) {}
};

constexpr int kMaxSteps = 100;
constexpr double kStepPenalty = 0.1;
constexpr double kLossReward = -1.0;

std::pair<GameState, std::string> reset(const Game& game);

// Exactly the actions executable in this state, lexicographically sorted.
// Throws when called on a terminal state.
std::vector<std::string> admissible_actions(const GameState& state);

// Deterministic transition. The action must come from admissible_actions.
StepResult step(GameState& state, const std::string& action);

int max_score(const Game& game);

std::string room_description(const GameState& state);
std::string recipe_text(const Game& game);

// Exit directions visible from the current room, including ones blocked by a
// closed door. This is player-visible information (it appears in the
// observation text).
std::vector<Direction> visible_exits(const GameState& state);

// Every fixed word the observation/recipe/action templates can emit.
std::vector<std::string> template_words();

// Every token this game can emit through observations, recipe text and action
// strings (entity names plus the template words). Used to build vocabularies.
std::vector<std::string> text_lexicon(const Game& game);

// One line per turn: step index, action, raw reward, done flag (tab-separated).
class TranscriptWriter {
public:
    TranscriptWriter() = default;
    explicit TranscriptWriter(const std::string& path);
    void log(int step_index, const std::string& action, int raw_reward, Progress done);
    bool open() const { return out_.is_open(); }

private:
    std::ofstream out_;
};

}  // namespace cookbench::engine
