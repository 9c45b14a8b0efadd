#include "cookbench/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cookbench/rng.hpp"
#include "cookbench/util.hpp"

namespace cookbench::config {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void apply_profile(RunConfig& cfg, const std::string& profile) {
    cfg.profile = profile;
    if (profile == "desk") {
        cfg.family.types_per_tier = {3, 3, 3, 3, 3, 3};
        cfg.family.games_per_type = 6;
        cfg.dev_count = 12;
        cfg.train.observation_steps = 1000;
        cfg.train.replay_capacity = 50000;
        cfg.train.lr = 1e-4;
        cfg.train.stage_steps = 30000;
        cfg.train.epsilon_end = 0.05;
        cfg.train.epsilon_horizon = 20000;
        cfg.train.mixed_epsilon_horizon = 150000;
        cfg.train.target_sync_every = 500;
        cfg.train.eval_every = 2000;
        cfg.train.dev_eval_cap = 12;
        cfg.train.dev_eval_episodes = 2;
        cfg.train.early_stop_dev_pct = 96.0;
    } else if (profile == "paper") {
        cfg.family.types_per_tier = {21, 21, 21, 53, 53, 53};  // 222 types, 4440 games at 20 per type
        cfg.family.games_per_type = 20;
        cfg.dev_count = 400;
        cfg.train.observation_steps = 50000;
        cfg.train.replay_capacity = 500000;
        cfg.train.lr = 1e-5;
        cfg.train.stage_steps = 2000000;
        cfg.train.epsilon_horizon = 2000000;
        cfg.train.mixed_epsilon_horizon = 10000000;
        cfg.train.target_sync_every = 1000;
        cfg.train.eval_every = 10000;
        cfg.train.dev_eval_cap = 40;
        cfg.train.dev_eval_episodes = 3;
        cfg.train.early_stop_dev_pct = -1.0;
    } else {
        throw ConfigError("unknown profile '" + profile + "' (desk or paper)");
    }
}

std::uint64_t family_config_hash(const gamegen::FamilyConfig& family, int dev_count, std::uint64_t seed) {
    std::uint64_t h = fnv1a64("cookbench-family-v1");
    for (int t : family.types_per_tier) h = mix_seed(h ^ static_cast<std::uint64_t>(t));
    h = mix_seed(h ^ static_cast<std::uint64_t>(family.games_per_type));
    h = mix_seed(h ^ family.seed);
    h = mix_seed(h ^ static_cast<std::uint64_t>(dev_count));
    h = mix_seed(h ^ seed);
    return h;
}

void write_family(const std::string& dir, const gamegen::GameSet& set, const gamegen::Splits& splits,
                  std::uint64_t config_hash) {
    fs::create_directories(fs::path(dir) / "games");
    for (const auto& g : set.games) {
        gamegen::save_game(g, (fs::path(dir) / "games" / (g.id + ".json")).string());
    }
    ordered_json m;
    m["format"] = "cookbench-family";
    m["version"] = 1;
    m["config_hash"] = config_hash;
    m["game_count"] = set.games.size();
    auto reports = gamegen::tier_reports(set);
    m["tiers"] = ordered_json::array();
    for (const auto& r : reports) {
        m["tiers"].push_back({{"tier", r.tier}, {"types", r.types}, {"games", r.games},
                              {"max_score_total", r.max_score_total}});
    }
    m["splits"] = {{"train", splits.train}, {"dev", splits.dev}, {"test1", splits.test1},
                   {"test2", splits.test2}};
    std::ofstream f(fs::path(dir) / "manifest.json", std::ios::trunc);
    if (!f) throw DataError("cannot write manifest in " + dir);
    f << m.dump(2) << "\n";
}

bool manifest_exists(const std::string& dir) { return fs::exists(fs::path(dir) / "manifest.json"); }

namespace {

ordered_json read_manifest(const std::string& dir) {
    std::ifstream f(fs::path(dir) / "manifest.json");
    if (!f) throw DataError("no manifest.json in " + dir + " (run the gen command first)");
    try {
        return ordered_json::parse(f);
    } catch (const std::exception& e) {
        throw DataError("corrupt manifest in " + dir + ": " + e.what());
    }
}

}  // namespace

std::uint64_t manifest_config_hash(const std::string& dir) {
    return read_manifest(dir).at("config_hash").get<std::uint64_t>();
}

FamilyOnDisk load_family(const std::string& dir) {
    auto m = read_manifest(dir);
    FamilyOnDisk out;
    out.config_hash = m.at("config_hash").get<std::uint64_t>();
    out.splits.train = m.at("splits").at("train").get<std::vector<std::string>>();
    out.splits.dev = m.at("splits").at("dev").get<std::vector<std::string>>();
    out.splits.test1 = m.at("splits").at("test1").get<std::vector<std::string>>();
    out.splits.test2 = m.at("splits").at("test2").get<std::vector<std::string>>();

    for (const auto& entry : fs::directory_iterator(fs::path(dir) / "games")) {
        if (entry.path().extension() == ".json") {
            out.games.push_back(gamegen::load_game(entry.path().string()));
        }
    }
    std::sort(out.games.begin(), out.games.end(),
              [](const gamegen::Game& a, const gamegen::Game& b) { return a.id < b.id; });
    if (out.games.empty()) throw DataError("no game files found in " + dir);
    return out;
}

}  // namespace cookbench::config
