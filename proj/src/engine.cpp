#include "cookbench/engine.hpp"

#include <algorithm>
#include <set>

#include "cookbench/textenc.hpp"
#include "cookbench/util.hpp"

namespace cookbench::engine {

namespace {

using gamegen::Item;
using gamegen::ItemKind;
using gamegen::RecipeEntry;

std::string article(const std::string& name) {
    if (name.empty()) return "a";
    switch (name[0]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u': return "an";
        default: return "a";
    }
}

std::string item_display(const GameState& s, int item) {
    const ItemState& st = s.items[static_cast<std::size_t>(item)];
    std::string out;
    if (st.cut != CutState::none) out += std::string(gamegen::cut_adjective(st.cut)) + " ";
    if (st.cook != CookState::none) out += std::string(gamegen::cook_adjective(st.cook)) + " ";
    out += s.game->items[static_cast<std::size_t>(item)].name;
    return out;
}

std::string join_list(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
        out += parts[i];
    }
    return out;
}

int inventory_count(const GameState& s) {
    int n = 0;
    for (const auto& st : s.items) {
        if (st.where == ItemState::Where::inventory) ++n;
    }
    return n;
}

bool capacity_allows_take(const GameState& s) {
    int cap = s.game->inventory_capacity;
    return cap == 0 || inventory_count(s) < cap;
}

bool cookbook_accessible(const GameState& s) {
    const Game& g = *s.game;
    if (g.cookbook_container < 0) return s.current_room == g.kitchen;
    const auto& c = g.containers[static_cast<std::size_t>(g.cookbook_container)];
    return s.current_room == c.room && s.container_open[static_cast<std::size_t>(g.cookbook_container)];
}

struct Action {
    enum class Kind {
        go,
        open_door,
        open_container,
        take,
        take_from,
        drop,
        cut,
        cook,
        examine,
        examine_item,
        prepare,
        eat,
    };
    Kind kind;
    std::string text;
    Direction dir = Direction::north;
    int item = -1;
    int container = -1;
    int door = -1;
    CutState cut = CutState::none;
    CookState cook = CookState::none;
};

std::vector<Action> enumerate_actions(const GameState& s) {
    const Game& g = *s.game;
    const auto& room = g.rooms[static_cast<std::size_t>(s.current_room)];
    std::vector<Action> out;

    for (const auto& [d, next] : room.exits) {
        auto door_it = room.exit_door.find(d);
        if (door_it != room.exit_door.end() && !s.door_open[static_cast<std::size_t>(door_it->second)]) {
            Action a;
            a.kind = Action::Kind::open_door;
            a.door = door_it->second;
            a.text = "open " + g.doors[static_cast<std::size_t>(door_it->second)].name;
            out.push_back(a);
            continue;  // the way is blocked until the door is opened
        }
        Action a;
        a.kind = Action::Kind::go;
        a.dir = d;
        a.text = std::string("go ") + gamegen::to_string(d);
        out.push_back(a);
    }

    for (std::size_t c = 0; c < g.containers.size(); ++c) {
        if (g.containers[c].room != s.current_room) continue;
        if (!s.container_open[c]) {
            Action a;
            a.kind = Action::Kind::open_container;
            a.container = static_cast<int>(c);
            a.text = "open " + g.containers[c].name;
            out.push_back(a);
        }
    }

    bool can_take = capacity_allows_take(s);
    for (std::size_t i = 0; i < g.items.size(); ++i) {
        const ItemState& st = s.items[i];
        const Item& item = g.items[i];
        if (st.where == ItemState::Where::room_floor && st.room == s.current_room && can_take) {
            Action a;
            a.kind = Action::Kind::take;
            a.item = static_cast<int>(i);
            a.text = "take " + item.name;
            out.push_back(a);
        } else if (st.where == ItemState::Where::container && can_take) {
            const auto& cont = g.containers[static_cast<std::size_t>(st.container)];
            if (cont.room == s.current_room && s.container_open[static_cast<std::size_t>(st.container)]) {
                Action a;
                a.kind = Action::Kind::take_from;
                a.item = static_cast<int>(i);
                a.container = st.container;
                a.text = "take " + item.name + " from " + cont.name;
                out.push_back(a);
            }
        } else if (st.where == ItemState::Where::inventory) {
            Action a;
            a.kind = Action::Kind::drop;
            a.item = static_cast<int>(i);
            a.text = "drop " + item.name;
            out.push_back(a);
            if (item.kind == ItemKind::ingredient) {
                if (s.current_room == g.kitchen) {  // the knife lives in the kitchen
                    for (CutState cs : {CutState::chopped, CutState::diced, CutState::sliced}) {
                        Action cutact;
                        cutact.kind = Action::Kind::cut;
                        cutact.item = static_cast<int>(i);
                        cutact.cut = cs;
                        cutact.text = std::string(gamegen::cut_verb(cs)) + " " + item.name;
                        out.push_back(cutact);
                    }
                }
                for (CookState ck : {CookState::fried, CookState::roasted, CookState::grilled}) {
                    if (!g.has_appliance(s.current_room, ck)) continue;
                    Action cookact;
                    cookact.kind = Action::Kind::cook;
                    cookact.item = static_cast<int>(i);
                    cookact.cook = ck;
                    cookact.text = "cook " + item.name + " with " + gamegen::cook_appliance(ck);
                    out.push_back(cookact);
                }
            }
        }
    }

    if (cookbook_accessible(s)) {
        Action a;
        a.kind = Action::Kind::examine;
        a.text = "examine cookbook";
        out.push_back(a);
    }
    for (std::size_t i = 0; i < g.items.size(); ++i) {
        const ItemState& st = s.items[i];
        bool visible = st.where == ItemState::Where::inventory ||
                       (st.where == ItemState::Where::room_floor && st.room == s.current_room) ||
                       (st.where == ItemState::Where::container &&
                        g.containers[static_cast<std::size_t>(st.container)].room == s.current_room &&
                        s.container_open[static_cast<std::size_t>(st.container)]);
        if (visible) {
            Action a;
            a.kind = Action::Kind::examine_item;
            a.item = static_cast<int>(i);
            a.text = "examine " + g.items[i].name;
            out.push_back(a);
        }
    }

    if (!s.meal_prepared && s.recipe_read && s.current_room == g.kitchen) {
        bool ready = true;
        for (const auto& e : g.recipe) {
            const ItemState& st = s.items[static_cast<std::size_t>(e.item)];
            if (st.where != ItemState::Where::inventory || st.cut != e.cut || st.cook != e.cook) {
                ready = false;
                break;
            }
        }
        if (ready) {
            Action a;
            a.kind = Action::Kind::prepare;
            a.text = "prepare meal";
            out.push_back(a);
        }
    }
    if (s.meal_prepared) {
        Action a;
        a.kind = Action::Kind::eat;
        a.text = "eat meal";
        out.push_back(a);
    }

    std::sort(out.begin(), out.end(), [](const Action& a, const Action& b) { return a.text < b.text; });
    return out;
}

}  // namespace

std::string recipe_text(const Game& game) {
    std::vector<std::string> names;
    for (const auto& e : game.recipe) {
        names.push_back(article(game.items[static_cast<std::size_t>(e.item)].name) + " " +
                        game.items[static_cast<std::size_t>(e.item)].name);
    }
    std::string out = "You open the cookbook and start reading. Recipe. Ingredients: " + join_list(names) + ".";
    out += " Directions:";
    for (const auto& e : game.recipe) {
        const std::string& name = game.items[static_cast<std::size_t>(e.item)].name;
        if (e.cut != CutState::none) {
            out += " " + std::string(gamegen::cut_verb(e.cut)) + " the " + name + ".";
        }
        if (e.cook != CookState::none) {
            out += " " + std::string(gamegen::cook_verb(e.cook)) + " the " + name + ".";
        }
    }
    out += " prepare the meal.";
    return out;
}

std::string room_description(const GameState& s) {
    const Game& g = *s.game;
    const auto& room = g.rooms[static_cast<std::size_t>(s.current_room)];
    std::string out = "You are in the " + room.name + ".";

    std::vector<std::string> seen;
    if (g.cookbook_container < 0 && s.current_room == g.kitchen) seen.push_back("a cookbook");
    if (s.current_room == g.kitchen) {
        seen.push_back("a knife");
        seen.push_back("a stove");
        seen.push_back("an oven");
    }
    if (g.bbq_room >= 0 && s.current_room == g.bbq_room && g.bbq_room != g.kitchen) seen.push_back("a bbq");
    if (g.bbq_room >= 0 && g.bbq_room == g.kitchen && s.current_room == g.kitchen) seen.push_back("a bbq");
    for (std::size_t c = 0; c < g.containers.size(); ++c) {
        if (g.containers[c].room != s.current_room) continue;
        std::string entry = article(g.containers[c].name) + " " + g.containers[c].name;
        if (!s.container_open[c]) {
            entry += " (closed)";
        } else {
            std::vector<std::string> inside;
            if (g.cookbook_container == static_cast<int>(c)) inside.push_back("a cookbook");
            for (std::size_t i = 0; i < g.items.size(); ++i) {
                if (s.items[i].where == ItemState::Where::container && s.items[i].container == static_cast<int>(c)) {
                    std::string d = item_display(s, static_cast<int>(i));
                    inside.push_back(article(d) + " " + d);
                }
            }
            entry += inside.empty() ? " (empty)" : " (containing " + join_list(inside) + ")";
        }
        seen.push_back(entry);
    }
    for (std::size_t i = 0; i < g.items.size(); ++i) {
        if (s.items[i].where == ItemState::Where::room_floor && s.items[i].room == s.current_room) {
            std::string d = item_display(s, static_cast<int>(i));
            seen.push_back(article(d) + " " + d);
        }
    }
    out += seen.empty() ? " You see nothing interesting here." : " You see " + join_list(seen) + " here.";

    if (!room.exits.empty()) {
        std::vector<std::string> exits;
        for (const auto& [d, next] : room.exits) {
            auto door_it = room.exit_door.find(d);
            if (door_it == room.exit_door.end()) {
                exits.push_back(std::string("an open exit ") + gamegen::to_string(d));
            } else {
                const auto& door = g.doors[static_cast<std::size_t>(door_it->second)];
                std::string state = s.door_open[static_cast<std::size_t>(door_it->second)] ? "an open " : "a closed ";
                exits.push_back(state + door.name + " " + gamegen::to_string(d));
            }
        }
        out += " Exits: " + join_list(exits) + ".";
    }

    std::vector<std::string> carried;
    for (std::size_t i = 0; i < g.items.size(); ++i) {
        if (s.items[i].where == ItemState::Where::inventory) {
            std::string d = item_display(s, static_cast<int>(i));
            carried.push_back(article(d) + " " + d);
        }
    }
    if (s.meal_prepared) carried.push_back("a meal");
    out += carried.empty() ? " You are carrying nothing." : " You are carrying " + join_list(carried) + ".";
    return out;
}

std::pair<GameState, std::string> reset(const Game& game) {
    GameState s;
    s.game = &game;
    s.current_room = game.start_room;
    s.items.resize(game.items.size());
    for (std::size_t i = 0; i < game.items.size(); ++i) {
        const Item& item = game.items[i];
        ItemState st;
        switch (item.start_loc) {
            case Item::StartLoc::room_floor:
                st.where = ItemState::Where::room_floor;
                st.room = item.start_room;
                break;
            case Item::StartLoc::container:
                st.where = ItemState::Where::container;
                st.container = item.start_container;
                break;
            case Item::StartLoc::inventory: st.where = ItemState::Where::inventory; break;
        }
        s.items[i] = st;
    }
    s.door_open.resize(game.doors.size());
    for (std::size_t d = 0; d < game.doors.size(); ++d) s.door_open[d] = !game.doors[d].starts_closed;
    s.container_open.resize(game.containers.size());
    for (std::size_t c = 0; c < game.containers.size(); ++c) {
        s.container_open[c] = !game.containers[c].starts_closed;
    }
    return {s, room_description(s)};
}

std::vector<std::string> admissible_actions(const GameState& state) {
    if (!state.running()) throw InadmissibleAction("admissible_actions called on a terminal state");
    std::vector<std::string> out;
    for (const auto& a : enumerate_actions(state)) out.push_back(a.text);
    return out;
}

std::vector<Direction> visible_exits(const GameState& state) {
    std::vector<Direction> out;
    for (const auto& [d, next] : state.game->rooms[static_cast<std::size_t>(state.current_room)].exits) {
        out.push_back(d);
    }
    return out;
}

StepResult step(GameState& s, const std::string& action) {
    if (!s.running()) throw InadmissibleAction("step called on a terminal state");
    const Game& g = *s.game;
    auto actions = enumerate_actions(s);
    const Action* act = nullptr;
    for (const auto& a : actions) {
        if (a.text == action) {
            act = &a;
            break;
        }
    }
    if (!act) throw InadmissibleAction("action not admissible: '" + action + "'");

    ++s.steps_taken;
    int raw = 0;
    bool destroyed = false;
    std::string effect;

    switch (act->kind) {
        case Action::Kind::go:
            s.current_room = g.rooms[static_cast<std::size_t>(s.current_room)].exits.at(act->dir);
            effect = std::string("You go ") + gamegen::to_string(act->dir) + ".";
            break;
        case Action::Kind::open_door:
            s.door_open[static_cast<std::size_t>(act->door)] = true;
            effect = "You open the " + g.doors[static_cast<std::size_t>(act->door)].name + ".";
            break;
        case Action::Kind::open_container:
            s.container_open[static_cast<std::size_t>(act->container)] = true;
            effect = "You open the " + g.containers[static_cast<std::size_t>(act->container)].name + ".";
            break;
        case Action::Kind::take:
        case Action::Kind::take_from: {
            ItemState& st = s.items[static_cast<std::size_t>(act->item)];
            st.where = ItemState::Where::inventory;
            st.room = -1;
            st.container = -1;
            const RecipeEntry* e = g.recipe_entry_for(act->item);
            if (e && e->needs_acquisition && !st.acquired) {
                st.acquired = true;
                raw += 1;
            }
            effect = "You take the " + g.items[static_cast<std::size_t>(act->item)].name;
            if (act->kind == Action::Kind::take_from) {
                effect += " from the " + g.containers[static_cast<std::size_t>(act->container)].name;
            }
            effect += ".";
            break;
        }
        case Action::Kind::drop: {
            ItemState& st = s.items[static_cast<std::size_t>(act->item)];
            st.where = ItemState::Where::room_floor;
            st.room = s.current_room;
            effect = "You drop the " + g.items[static_cast<std::size_t>(act->item)].name + ".";
            break;
        }
        case Action::Kind::cut: {
            ItemState& st = s.items[static_cast<std::size_t>(act->item)];
            const std::string& name = g.items[static_cast<std::size_t>(act->item)].name;
            const RecipeEntry* e = g.recipe_entry_for(act->item);
            effect = "You " + std::string(gamegen::cut_verb(act->cut)) + " the " + name + ".";
            if (e) {
                if (e->cut != CutState::none && st.cut == CutState::none && act->cut == e->cut) {
                    st.cut = act->cut;
                    raw += 1;
                } else {
                    destroyed = true;
                    effect += " You ruined the " + name + ". You have lost.";
                }
            } else {
                st.cut = act->cut;
            }
            break;
        }
        case Action::Kind::cook: {
            ItemState& st = s.items[static_cast<std::size_t>(act->item)];
            const std::string& name = g.items[static_cast<std::size_t>(act->item)].name;
            const RecipeEntry* e = g.recipe_entry_for(act->item);
            effect = "You cook the " + name + " with the " + gamegen::cook_appliance(act->cook) + ".";
            if (e) {
                if (e->cook != CookState::none && st.cook == CookState::none && act->cook == e->cook) {
                    st.cook = act->cook;
                    raw += 1;
                    effect += " The " + name + " is now " + gamegen::cook_adjective(act->cook) + ".";
                } else {
                    destroyed = true;
                    effect += " You ruined the " + name + ". You have lost.";
                }
            } else {
                st.cook = act->cook;
                effect += " The " + name + " is now " + gamegen::cook_adjective(act->cook) + ".";
            }
            break;
        }
        case Action::Kind::examine:
            s.recipe_read = true;
            effect = recipe_text(g);
            break;
        case Action::Kind::examine_item: {
            const std::string& name = g.items[static_cast<std::size_t>(act->item)].name;
            effect = g.items[static_cast<std::size_t>(act->item)].kind == ItemKind::ingredient
                         ? "The " + name + " looks delicious."
                         : "The " + name + " does not look useful.";
            break;
        }
        case Action::Kind::prepare:
            s.meal_prepared = true;
            for (const auto& e : g.recipe) {
                s.items[static_cast<std::size_t>(e.item)].where = ItemState::Where::consumed;
            }
            effect = "You prepare the meal.";
            break;
        case Action::Kind::eat:
            raw += 1;
            s.done = Progress::won;
            effect = "You eat the meal. You have won.";
            break;
    }

    s.raw_score += raw;
    StepResult r;
    if (destroyed) {
        s.done = Progress::lost;
        r.shaped_reward = kLossReward;
    } else {
        if (s.done != Progress::won && s.steps_taken >= kMaxSteps) {
            s.done = Progress::lost;
            effect += " You have run out of steps.";
        }
        r.shaped_reward = raw - kStepPenalty;
    }
    r.raw_reward = raw;
    r.done = s.done;
    r.observation = effect + " " + room_description(s);
    if (s.running()) r.admissible = admissible_actions(s);
    return r;
}

int max_score(const Game& game) { return game.max_score; }

std::vector<std::string> template_words() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> src = {
            // room description and effects
            "you", "are", "in", "the", "see", "nothing", "interesting", "here", "exits", "an", "open",
            "exit", "a", "closed", "carrying", "and", "containing", "empty", "go", "north", "south",
            "east", "west", "take", "from", "drop", "chop", "dice", "slice", "cook", "with", "examine",
            "prepare", "eat", "meal", "cookbook", "knife", "stove", "oven", "bbq", "is", "now", "to",
            "chopped", "diced", "sliced", "fried", "roasted", "grilled", "ruined", "have", "lost", "won",
            "run", "out", "of", "steps", "recipe", "ingredients", "directions", "start", "reading",
            "fry", "roast", "grill", "looks", "delicious", "does", "not", "look", "useful",
            // punctuation emitted by templates
            ".", ",", ":", "(", ")",
        };
        std::sort(src.begin(), src.end());
        src.erase(std::unique(src.begin(), src.end()), src.end());
        return src;
    }();
    return words;
}

std::vector<std::string> text_lexicon(const Game& game) {
    std::set<std::string> words;
    for (const auto& w : template_words()) words.insert(w);
    auto add = [&](const std::string& text) {
        for (const auto& t : textenc::tokenize(text)) words.insert(t);
    };
    for (const auto& r : game.rooms) add(r.name);
    for (const auto& d : game.doors) add(d.name);
    for (const auto& c : game.containers) add(c.name);
    for (const auto& i : game.items) add(i.name);
    return {words.begin(), words.end()};
}

TranscriptWriter::TranscriptWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw DataError("cannot open transcript file: " + path);
}

void TranscriptWriter::log(int step_index, const std::string& action, int raw_reward, Progress done) {
    if (!out_.is_open()) return;
    const char* flag = done == Progress::running ? "running" : (done == Progress::won ? "won" : "lost");
    out_ << step_index << "\t" << action << "\t" << raw_reward << "\t" << flag << "\n";
}

}  // namespace cookbench::engine
