#include "cookbench/mapfam.hpp"

#include <algorithm>

namespace cookbench::mapfam {

const char* to_string(GoStrategy s) {
    switch (s) {
        case GoStrategy::go_cardinal: return "go-cardinal";
        case GoStrategy::go_random: return "go-random";
        case GoStrategy::go_room: return "go-room";
    }
    return "?";
}

std::optional<GoStrategy> strategy_from_string(const std::string& s) {
    if (s == "go-cardinal") return GoStrategy::go_cardinal;
    if (s == "go-random") return GoStrategy::go_random;
    if (s == "go-room") return GoStrategy::go_room;
    return std::nullopt;
}

void KnowledgeGraph::observe(const std::string& from_room, Direction d, const std::string& to_room) {
    auto key = std::make_pair(from_room, static_cast<int>(d));
    auto it = edges_.find(key);
    if (it == edges_.end()) {
        edges_.emplace(std::move(key), to_room);
    } else if (it->second != to_room) {
        throw KgContradiction("knowledge graph contradiction: " + from_room + " " +
                              gamegen::to_string(d) + " leads to both " + it->second + " and " + to_room);
    }
}

std::optional<std::string> KnowledgeGraph::destination(const std::string& room, Direction d) const {
    auto it = edges_.find(std::make_pair(room, static_cast<int>(d)));
    if (it == edges_.end()) return std::nullopt;
    return it->second;
}

bool KnowledgeGraph::knows_all(const std::string& room, const std::vector<Direction>& exits) const {
    for (Direction d : exits) {
        if (!destination(room, d)) return false;
    }
    return true;
}

std::vector<std::tuple<std::string, Direction, std::string>> KnowledgeGraph::edges() const {
    std::vector<std::tuple<std::string, Direction, std::string>> out;
    for (const auto& [key, to] : edges_) {
        out.emplace_back(key.first, static_cast<Direction>(key.second), to);
    }
    return out;
}

namespace {

std::optional<Direction> parse_go(const std::string& action) {
    if (action.rfind("go ", 0) != 0) return std::nullopt;
    return gamegen::direction_from_string(action.substr(3));
}

}  // namespace

std::vector<AugmentedAction> augment_actions(const std::vector<std::string>& admissible,
                                             const KnowledgeGraph& kg, const std::string& current_room,
                                             GoStrategy strategy) {
    std::vector<AugmentedAction> out;
    out.reserve(admissible.size());
    bool emitted_conflated_go = false;
    for (const auto& action : admissible) {
        auto dir = parse_go(action);
        if (!dir) {
            out.push_back({action, action});
            continue;
        }
        switch (strategy) {
            case GoStrategy::go_cardinal: out.push_back({action, action}); break;
            case GoStrategy::go_random:
                if (!emitted_conflated_go) {
                    out.push_back({"go", std::nullopt});
                    emitted_conflated_go = true;
                }
                break;
            case GoStrategy::go_room: {
                auto dest = kg.destination(current_room, *dir);
                out.push_back({dest ? action + " to " + *dest : action, action});
                break;
            }
        }
    }
    return out;
}

Direction resolve_random_go(const std::vector<Direction>& admissible_directions, Rng& rng) {
    if (admissible_directions.empty()) {
        throw std::logic_error("resolve_random_go: no admissible go direction");
    }
    return admissible_directions[rng.uniform_u64(admissible_directions.size())];
}

std::optional<std::string> familiarization_policy(const PlayerView& view, const KnowledgeGraph& kg,
                                                  int step_index, Rng& rng) {
    if (step_index >= kFamiliarizationSteps) return std::nullopt;
    if (kg.knows_all(view.room_name, view.visible_exits)) return std::nullopt;
    std::vector<std::string> walk;
    for (const auto& a : view.admissible) {
        if (a.rfind("go ", 0) == 0 || a.rfind("open ", 0) == 0) walk.push_back(a);
    }
    if (walk.empty()) return std::nullopt;
    return walk[rng.uniform_u64(walk.size())];
}

}  // namespace cookbench::mapfam
