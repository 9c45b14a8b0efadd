#include <fstream>

#include <json.hpp>

#include "cookbench/gamegen.hpp"
#include "cookbench/util.hpp"

namespace cookbench::gamegen {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormat = "cookbench-game";
constexpr int kVersion = 1;

const char* cut_name(CutState s) {
    switch (s) {
        case CutState::none: return "none";
        case CutState::chopped: return "chopped";
        case CutState::diced: return "diced";
        case CutState::sliced: return "sliced";
    }
    return "none";
}

CutState cut_from(const std::string& s) {
    if (s == "none") return CutState::none;
    if (s == "chopped") return CutState::chopped;
    if (s == "diced") return CutState::diced;
    if (s == "sliced") return CutState::sliced;
    throw DataError("bad cut state: " + s);
}

const char* cook_name(CookState s) {
    switch (s) {
        case CookState::none: return "none";
        case CookState::fried: return "fried";
        case CookState::roasted: return "roasted";
        case CookState::grilled: return "grilled";
    }
    return "none";
}

CookState cook_from(const std::string& s) {
    if (s == "none") return CookState::none;
    if (s == "fried") return CookState::fried;
    if (s == "roasted") return CookState::roasted;
    if (s == "grilled") return CookState::grilled;
    throw DataError("bad cook state: " + s);
}

}  // namespace

std::string game_to_text(const Game& g) {
    ordered_json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["id"] = g.id;
    j["tier"] = g.tier;
    j["seed"] = g.seed;
    j["spec"] = {{"recipe_size", g.spec.recipe_size}, {"room_count", g.spec.room_count},
                 {"needs_take", g.spec.needs_take},   {"needs_open", g.spec.needs_open},
                 {"needs_drop", g.spec.needs_drop},   {"needs_cut", g.spec.needs_cut},
                 {"needs_cook", g.spec.needs_cook}};
    j["max_score"] = g.max_score;
    j["start_room"] = g.start_room;
    j["kitchen"] = g.kitchen;
    j["bbq_room"] = g.bbq_room;
    j["cookbook_container"] = g.cookbook_container;
    j["inventory_capacity"] = g.inventory_capacity;

    j["rooms"] = ordered_json::array();
    for (const auto& r : g.rooms) {
        ordered_json room;
        room["name"] = r.name;
        room["base"] = r.base;
        ordered_json exits = ordered_json::object();
        for (const auto& [d, to] : r.exits) exits[to_string(d)] = to;
        room["exits"] = exits;
        ordered_json doors = ordered_json::object();
        for (const auto& [d, door] : r.exit_door) doors[to_string(d)] = door;
        room["doors"] = doors;
        j["rooms"].push_back(room);
    }
    j["doors"] = ordered_json::array();
    for (const auto& d : g.doors) {
        j["doors"].push_back({{"name", d.name}, {"starts_closed", d.starts_closed}});
    }
    j["containers"] = ordered_json::array();
    for (const auto& c : g.containers) {
        j["containers"].push_back({{"name", c.name}, {"room", c.room}, {"starts_closed", c.starts_closed}});
    }
    j["items"] = ordered_json::array();
    for (const auto& item : g.items) {
        ordered_json obj;
        obj["name"] = item.name;
        obj["kind"] = item.kind == ItemKind::ingredient ? "ingredient" : "junk";
        switch (item.start_loc) {
            case Item::StartLoc::room_floor: obj["start"] = "floor"; break;
            case Item::StartLoc::container: obj["start"] = "container"; break;
            case Item::StartLoc::inventory: obj["start"] = "inventory"; break;
        }
        obj["start_room"] = item.start_room;
        obj["start_container"] = item.start_container;
        j["items"].push_back(obj);
    }
    j["recipe"] = ordered_json::array();
    for (const auto& e : g.recipe) {
        j["recipe"].push_back({{"item", e.item},
                               {"cut", cut_name(e.cut)},
                               {"cook", cook_name(e.cook)},
                               {"needs_acquisition", e.needs_acquisition}});
    }
    return j.dump(2) + "\n";
}

Game game_from_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("cannot parse game file: ") + e.what());
    }
    if (j.value("format", "") != kFormat) throw DataError("not a cookbench game file");
    if (j.value("version", 0) != kVersion) {
        throw DataError("unsupported game file version " + std::to_string(j.value("version", 0)));
    }
    Game g;
    g.id = j.at("id").get<std::string>();
    g.tier = j.at("tier").get<int>();
    g.seed = j.at("seed").get<std::uint64_t>();
    const auto& spec = j.at("spec");
    g.spec.recipe_size = spec.at("recipe_size").get<int>();
    g.spec.room_count = spec.at("room_count").get<int>();
    g.spec.needs_take = spec.at("needs_take").get<int>();
    g.spec.needs_open = spec.at("needs_open").get<bool>();
    g.spec.needs_drop = spec.at("needs_drop").get<bool>();
    g.spec.needs_cut = spec.at("needs_cut").get<bool>();
    g.spec.needs_cook = spec.at("needs_cook").get<bool>();
    g.max_score = j.at("max_score").get<int>();
    g.start_room = j.at("start_room").get<int>();
    g.kitchen = j.at("kitchen").get<int>();
    g.bbq_room = j.at("bbq_room").get<int>();
    g.cookbook_container = j.at("cookbook_container").get<int>();
    g.inventory_capacity = j.at("inventory_capacity").get<int>();

    for (const auto& room : j.at("rooms")) {
        Room r;
        r.name = room.at("name").get<std::string>();
        r.base = room.at("base").get<std::string>();
        for (const auto& [key, value] : room.at("exits").items()) {
            auto d = direction_from_string(key);
            if (!d) throw DataError("bad direction: " + key);
            r.exits[*d] = value.get<int>();
        }
        for (const auto& [key, value] : room.at("doors").items()) {
            auto d = direction_from_string(key);
            if (!d) throw DataError("bad direction: " + key);
            r.exit_door[*d] = value.get<int>();
        }
        g.rooms.push_back(std::move(r));
    }
    for (const auto& door : j.at("doors")) {
        g.doors.push_back({door.at("name").get<std::string>(), door.at("starts_closed").get<bool>()});
    }
    for (const auto& cont : j.at("containers")) {
        g.containers.push_back({cont.at("name").get<std::string>(), cont.at("room").get<int>(),
                                cont.at("starts_closed").get<bool>()});
    }
    for (const auto& obj : j.at("items")) {
        Item item;
        item.name = obj.at("name").get<std::string>();
        item.kind = obj.at("kind").get<std::string>() == "junk" ? ItemKind::junk : ItemKind::ingredient;
        std::string start = obj.at("start").get<std::string>();
        if (start == "floor") {
            item.start_loc = Item::StartLoc::room_floor;
        } else if (start == "container") {
            item.start_loc = Item::StartLoc::container;
        } else if (start == "inventory") {
            item.start_loc = Item::StartLoc::inventory;
        } else {
            throw DataError("bad item start location: " + start);
        }
        item.start_room = obj.at("start_room").get<int>();
        item.start_container = obj.at("start_container").get<int>();
        g.items.push_back(std::move(item));
    }
    for (const auto& obj : j.at("recipe")) {
        RecipeEntry e;
        e.item = obj.at("item").get<int>();
        e.cut = cut_from(obj.at("cut").get<std::string>());
        e.cook = cook_from(obj.at("cook").get<std::string>());
        e.needs_acquisition = obj.at("needs_acquisition").get<bool>();
        g.recipe.push_back(e);
    }
    return g;
}

void save_game(const Game& game, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write game file: " + path);
    f << game_to_text(game);
}

Game load_game(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read game file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return game_from_text(text);
}

}  // namespace cookbench::gamegen
