#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "cookbench/drrn.hpp"
#include "cookbench/evalpol.hpp"
#include "cookbench/gamegen.hpp"
#include "cookbench/harness.hpp"
#include "cookbench/mapfam.hpp"

namespace cookbench::config {

struct RunConfig {
    std::string games_dir = "data/games";
    std::string checkpoints_dir = "data/checkpoints";
    std::string reports_dir = "data/reports";

    std::string profile = "desk";  // desk | paper
    gamegen::FamilyConfig family;
    int dev_count = 12;
    drrn::TrainConfig train;
    harness::EvalConfig eval;
    mapfam::GoStrategy strategy = mapfam::GoStrategy::go_room;
    std::uint64_t seed = 1;
    int workers = 1;
};

// Fills in every size the profile determines; explicit flags override after.
void apply_profile(RunConfig& cfg, const std::string& profile);

struct FamilyOnDisk {
    std::vector<gamegen::Game> games;  // sorted by id
    gamegen::Splits splits;
    std::uint64_t config_hash = 0;
};

std::uint64_t family_config_hash(const gamegen::FamilyConfig& family, int dev_count, std::uint64_t seed);

// games/<id>.json plus manifest.json with splits and tier reports
void write_family(const std::string& dir, const gamegen::GameSet& set, const gamegen::Splits& splits,
                  std::uint64_t config_hash);
bool manifest_exists(const std::string& dir);
std::uint64_t manifest_config_hash(const std::string& dir);
FamilyOnDisk load_family(const std::string& dir);

}  // namespace cookbench::config
