#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cookbench/gamegen.hpp"
#include "cookbench/rng.hpp"

namespace cookbench::mapfam {

using gamegen::Direction;

enum class GoStrategy { go_cardinal, go_random, go_room };

const char* to_string(GoStrategy s);
std::optional<GoStrategy> strategy_from_string(const std::string& s);

struct KgContradiction : std::logic_error {
    explicit KgContradiction(const std::string& m) : std::logic_error(m) {}
};

// Per-game room connectivity learned from observed transitions. Holds only
// player-visible information (room names seen in observations).
class KnowledgeGraph {
public:
    // Records an observed transition; re-recording the same edge is a no-op,
    // recording a different destination for a known edge throws (the engine is
    // deterministic, so that would be an engine bug).
    void observe(const std::string& from_room, Direction d, const std::string& to_room);

    std::optional<std::string> destination(const std::string& room, Direction d) const;
    bool knows_all(const std::string& room, const std::vector<Direction>& exits) const;
    std::size_t edge_count() const { return edges_.size(); }
    void clear() { edges_.clear(); }

    // (room, direction, room) edge list for debugging dumps
    std::vector<std::tuple<std::string, Direction, std::string>> edges() const;

private:
    std::map<std::pair<std::string, int>, std::string> edges_;
};

struct AugmentedAction {
    std::string encoded;                       // what the policy sees and encodes
    std::optional<std::string> engine_action;  // concrete action; empty for the conflated "go"
};

// go-cardinal: identity. go-random: all "go <dir>" conflate into one "go"
// entry. go-room: "go <dir>" becomes "go <dir> to <destination>" where the
// graph knows the destination; unknown directions stay unaugmented. Non-go
// actions always pass through.
std::vector<AugmentedAction> augment_actions(const std::vector<std::string>& admissible,
                                             const KnowledgeGraph& kg, const std::string& current_room,
                                             GoStrategy strategy);

// Picks the concrete direction after the conflated "go" was chosen.
Direction resolve_random_go(const std::vector<Direction>& admissible_directions, Rng& rng);

struct PlayerView {
    std::string room_name;
    std::vector<Direction> visible_exits;  // includes directions blocked by closed doors
    std::vector<std::string> admissible;
};

// Random walk with go/open during the first 50 steps of an episode while the
// current room's exits are not fully mapped; otherwise the normal policy runs.
std::optional<std::string> familiarization_policy(const PlayerView& view, const KnowledgeGraph& kg,
                                                  int step_index, Rng& rng);

inline constexpr int kFamiliarizationSteps = 50;

}  // namespace cookbench::mapfam
