#include "cookbench/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "cookbench/config.hpp"
#include "cookbench/drrn.hpp"
#include "cookbench/engine.hpp"
#include "cookbench/harness.hpp"
#include "cookbench/rollout.hpp"
#include "cookbench/util.hpp"

namespace cookbench::cli {

namespace fs = std::filesystem;
using config::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

textenc::Vocab build_train_vocab(const config::FamilyOnDisk& fam) {
    std::set<std::string> train_ids(fam.splits.train.begin(), fam.splits.train.end());
    std::vector<std::string> words;
    for (const auto& g : fam.games) {
        if (train_ids.count(g.id)) {
            auto lex = engine::text_lexicon(g);
            words.insert(words.end(), lex.begin(), lex.end());
        }
    }
    if (words.empty()) throw DataError("training split is empty; cannot build a vocabulary");
    return textenc::Vocab::build(words);
}

std::vector<const gamegen::Game*> pick_split(const config::FamilyOnDisk& fam,
                                             const std::vector<std::string>& ids) {
    std::map<std::string, const gamegen::Game*> by_id;
    for (const auto& g : fam.games) by_id[g.id] = &g;
    std::vector<const gamegen::Game*> out;
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("split references missing game: " + id);
        out.push_back(it->second);
    }
    return out;
}

struct TrainContext {
    RunConfig cfg;
    std::string mode = "curric";
    std::string init_checkpoint;
    bool resume = false;
};

int cmd_gen(RunConfig& cfg, bool force) {
    auto hash = config::family_config_hash(cfg.family, cfg.dev_count, cfg.seed);
    if (config::manifest_exists(cfg.games_dir)) {
        if (config::manifest_config_hash(cfg.games_dir) == hash) {
            std::printf("games already generated in %s (config hash matches); nothing to do\n",
                        cfg.games_dir.c_str());
            return kExitOk;
        }
        if (!force) {
            std::fprintf(stderr,
                         "error: %s holds games from a different config; re-run with --force to replace\n",
                         cfg.games_dir.c_str());
            return kExitData;
        }
    } else if (fs::exists(fs::path(cfg.games_dir) / "games") &&
               !fs::is_empty(fs::path(cfg.games_dir) / "games") && !force) {
        std::fprintf(stderr, "error: %s contains partial output and no manifest; use --force\n",
                     cfg.games_dir.c_str());
        return kExitData;
    }
    if (force && fs::exists(cfg.games_dir)) fs::remove_all(cfg.games_dir);

    auto set = gamegen::generate_family(cfg.family);
    auto splits = gamegen::split_sets(set, cfg.dev_count, cfg.seed);
    config::write_family(cfg.games_dir, set, splits, hash);

    std::printf("generated %zu games into %s\n", set.games.size(), cfg.games_dir.c_str());
    std::printf("tier  types  games  total_max_score\n");
    for (const auto& r : gamegen::tier_reports(set)) {
        if (r.games == 0) continue;
        std::printf("%-5d %-6d %-6d %lld\n", r.tier, r.types, r.games, r.max_score_total);
    }
    std::printf("splits: train=%zu dev=%zu test1=%zu test2=%zu\n", splits.train.size(), splits.dev.size(),
                splits.test1.size(), splits.test2.size());
    return kExitOk;
}

void save_stage_checkpoint(const std::string& dir, const drrn::StageResult& result,
                           const textenc::Vocab& vocab) {
    neural::CheckpointMeta meta;
    meta.stage = result.stage;
    meta.train_step = result.env_steps;
    meta.vocab_hash = vocab.content_hash();
    auto path = fs::path(dir) / ("ckpt_stage-" + result.stage + "_best.bin");
    neural::save_checkpoint(path.string(), result.best_params, result.adam, meta);
}

std::optional<std::string> stage_checkpoint_path(const std::string& dir, const std::string& stage) {
    auto path = fs::path(dir) / ("ckpt_stage-" + stage + "_best.bin");
    if (fs::exists(path)) return path.string();
    return std::nullopt;
}

int cmd_train(const TrainContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    auto fam = config::load_family(cfg.games_dir);
    fs::create_directories(cfg.checkpoints_dir);

    auto vocab_path = fs::path(cfg.checkpoints_dir) / "vocab.txt";
    textenc::Vocab vocab;
    if (ctx.resume && fs::exists(vocab_path)) {
        vocab = textenc::Vocab::load(vocab_path.string());
    } else {
        vocab = build_train_vocab(fam);
        vocab.save(vocab_path.string());
    }

    drrn::TrainConfig tc = cfg.train;
    tc.workers = cfg.workers;
    tc.seed = cfg.seed;
    drrn::Trainer trainer(fam.games, fam.splits, vocab, cfg.strategy, tc);

    auto log_path = fs::path(cfg.checkpoints_dir) / "train_log.tsv";
    std::ofstream log(log_path, std::ios::app);
    trainer.set_progress([&](const std::string& stage, std::uint64_t env, std::uint64_t train, double eps,
                             double loss, double dev, const neural::QNetworkParams<float>& params,
                             const neural::AdamState<float>& adam) {
        log << "stage=" << stage << "\tenv_steps=" << env << "\ttrain_steps=" << train << "\teps=" << eps
            << "\tloss=" << loss << "\tdev_pct=" << dev << "\n";
        log.flush();
        neural::CheckpointMeta meta;
        meta.stage = stage;
        meta.train_step = env;
        meta.vocab_hash = vocab.content_hash();
        neural::save_checkpoint((fs::path(cfg.checkpoints_dir) / "ckpt_latest.bin").string(), params, adam,
                                meta);
        std::printf("[%s] env=%llu train=%llu eps=%.4f loss=%.5f dev=%.1f%%\n", stage.c_str(),
                    static_cast<unsigned long long>(env), static_cast<unsigned long long>(train), eps, loss,
                    dev);
        std::fflush(stdout);
    });

    std::vector<drrn::CurriculumStageSpec> schedule;
    std::vector<std::uint64_t> horizons;
    if (ctx.mode == "curric") {
        for (const auto& s : drrn::curriculum_schedule()) {
            schedule.push_back(s);
            horizons.push_back(tc.epsilon_horizon);
        }
    } else if (ctx.mode == "mixed") {
        schedule.push_back({"mixed", {1, 2, 3, 4, 5, 6}});
        horizons.push_back(tc.mixed_epsilon_horizon);
    } else {
        bool found = false;
        for (const auto& s : drrn::curriculum_schedule()) {
            if (s.name == ctx.mode) {
                schedule.push_back(s);
                horizons.push_back(tc.epsilon_horizon);
                found = true;
            }
        }
        if (!found) {
            throw ConfigError("unknown training mode '" + ctx.mode +
                              "' (curric, mixed, or a stage name like tier1)");
        }
    }

    neural::NetConfig net = tc.net;
    net.vocab_size = static_cast<std::int32_t>(vocab.size());
    neural::QNetworkParams<float> params;
    neural::AdamState<float> adam;
    if (!ctx.init_checkpoint.empty()) {
        auto ck = neural::load_checkpoint<float>(ctx.init_checkpoint);
        if (ck.meta.vocab_hash != vocab.content_hash()) {
            throw DataError("--init-checkpoint was trained with a different vocabulary");
        }
        params = std::move(ck.params);
        adam = std::move(ck.adam);
    } else {
        params = neural::QNetworkParams<float>::init(net, derive_seed(tc.seed, fnv1a64("init")));
        adam = neural::AdamState<float>::zeros(net);
    }

    // resume: completed stages are skipped; an interrupted stage restarts from
    // the latest periodic checkpoint (replay refills during observation)
    std::optional<neural::Checkpoint<float>> latest;
    if (ctx.resume) {
        auto latest_path = fs::path(cfg.checkpoints_dir) / "ckpt_latest.bin";
        if (fs::exists(latest_path)) {
            latest = neural::load_checkpoint<float>(latest_path.string());
            if (latest->meta.vocab_hash != vocab.content_hash()) {
                throw DataError("ckpt_latest.bin was trained with a different vocabulary");
            }
        }
    }

    drrn::StageResult last;
    bool have_last = false;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& stage = schedule[i];
        if (ctx.resume) {
            if (auto done = stage_checkpoint_path(cfg.checkpoints_dir, stage.name)) {
                auto ck = neural::load_checkpoint<float>(*done);
                last.stage = stage.name;
                last.best_params = std::move(ck.params);
                last.adam = std::move(ck.adam);
                last.best_params_hash = drrn::params_content_hash(last.best_params);
                have_last = true;
                std::printf("[%s] already complete, skipping\n", stage.name.c_str());
                continue;
            }
        }
        auto init_params = have_last ? last.best_params : params;
        auto init_adam = have_last ? last.adam : adam;
        std::uint64_t start_step = 0;
        if (latest && latest->meta.stage == stage.name) {
            init_params = std::move(latest->params);
            init_adam = std::move(latest->adam);
            start_step = latest->meta.train_step;
            std::printf("[%s] resuming from env step %llu\n", stage.name.c_str(),
                        static_cast<unsigned long long>(start_step));
            latest.reset();
        }
        last = trainer.run_stage(stage.name, stage.tiers, std::move(init_params), std::move(init_adam),
                                 horizons[i], start_step);
        have_last = true;
        save_stage_checkpoint(cfg.checkpoints_dir, last, vocab);
        std::printf("[%s] done: env=%llu train=%llu best_dev=%.1f%%\n", last.stage.c_str(),
                    static_cast<unsigned long long>(last.env_steps),
                    static_cast<unsigned long long>(last.train_steps), last.best_dev_pct);
    }

    neural::CheckpointMeta meta;
    meta.stage = last.stage;
    meta.train_step = last.env_steps;
    meta.vocab_hash = vocab.content_hash();
    auto final_path = fs::path(cfg.checkpoints_dir) / "ckpt_final.bin";
    neural::save_checkpoint(final_path.string(), last.best_params, last.adam, meta);
    std::printf("final checkpoint: %s (stage %s, best dev %.1f%%)\n", final_path.string().c_str(),
                last.stage.c_str(), last.best_dev_pct);
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint, const std::string& split_sel,
             const std::string& policy_name) {
    auto fam = config::load_family(cfg.games_dir);
    auto policy = evalpol::policy_from_string(policy_name);
    if (!policy) throw ConfigError("unknown policy '" + policy_name + "'");

    std::optional<neural::Checkpoint<float>> ck;
    std::optional<textenc::Vocab> vocab;
    if (*policy != evalpol::Policy::random_action) {
        if (checkpoint.empty()) throw ConfigError("policy " + policy_name + " needs --checkpoint");
        ck = neural::load_checkpoint<float>(checkpoint);
        auto vocab_path = fs::path(checkpoint).parent_path() / "vocab.txt";
        vocab = textenc::Vocab::load(vocab_path.string());
        if (vocab->content_hash() != ck->meta.vocab_hash) {
            throw DataError("vocabulary " + vocab_path.string() + " does not match the checkpoint");
        }
        if (static_cast<std::int32_t>(vocab->size()) != ck->params.cfg.vocab_size) {
            throw DataError("vocabulary size differs from the checkpoint embedding table");
        }
    }

    std::vector<std::pair<std::string, std::vector<const gamegen::Game*>>> targets;
    if (split_sel == "test1" || split_sel == "both") targets.emplace_back("test1", pick_split(fam, fam.splits.test1));
    if (split_sel == "test2" || split_sel == "both") targets.emplace_back("test2", pick_split(fam, fam.splits.test2));
    if (split_sel == "dev") targets.emplace_back("dev", pick_split(fam, fam.splits.dev));
    if (targets.empty()) throw ConfigError("unknown split '" + split_sel + "' (test1, test2, both, dev)");

    fs::create_directories(cfg.reports_dir);
    harness::EvalConfig ec = cfg.eval;
    ec.policy = *policy;
    ec.strategy = cfg.strategy;
    ec.seed = cfg.seed;
    ec.workers = cfg.workers;

    for (const auto& [name, games] : targets) {
        auto report = harness::evaluate(ck ? &ck->params : nullptr, vocab ? &*vocab : nullptr, games, ec);
        std::string label = policy_name + "/" + mapfam::to_string(cfg.strategy) + "/" + name;
        auto table = harness::format_report_table(report, "cookbench eval " + label);
        std::fputs(table.c_str(), stdout);
        auto base = fs::path(cfg.reports_dir) /
                    ("report_" + policy_name + "_" + mapfam::to_string(cfg.strategy) + "_" + name + "_" +
                     timestamp());
        std::ofstream out(base.string() + ".txt");
        out << table;
        std::ofstream lines(base.string() + ".tsv");
        lines << harness::format_report_lines(report, label);
        std::printf("wrote %s.txt\n", base.string().c_str());
    }
    return kExitOk;
}

int cmd_play(const RunConfig& cfg, const std::string& game_id, bool oracle_mode,
             const std::string& transcript_path) {
    auto path = fs::path(cfg.games_dir) / "games" / (game_id + ".json");
    if (!fs::exists(path)) throw DataError("no such game: " + game_id);
    auto game = gamegen::load_game(path.string());

    engine::TranscriptWriter transcript;
    if (!transcript_path.empty()) transcript = engine::TranscriptWriter(transcript_path);

    auto [state, obs] = engine::reset(game);
    std::printf("=== %s (tier %d, max score %d) ===\n%s\n", game.id.c_str(), game.tier, game.max_score,
                obs.c_str());

    std::vector<std::string> oracle_plan;
    std::size_t oracle_pos = 0;
    if (oracle_mode) oracle_plan = gamegen::oracle_solve(game);

    int turn = 0;
    while (state.running()) {
        auto actions = engine::admissible_actions(state);
        std::string chosen;
        if (oracle_mode) {
            chosen = oracle_plan[oracle_pos++];
            std::printf("\n> %s\n", chosen.c_str());
        } else {
            std::printf("\n");
            for (std::size_t i = 0; i < actions.size(); ++i) {
                std::printf("  [%zu] %s\n", i + 1, actions[i].c_str());
            }
            std::printf("choose 1-%zu (q quits): ", actions.size());
            std::string line;
            if (!std::getline(std::cin, line)) return kExitOk;
            if (line == "q" || line == "quit") {
                std::printf("quit without a score\n");
                return kExitOk;
            }
            char* end = nullptr;
            long idx = std::strtol(line.c_str(), &end, 10);
            if (end == line.c_str() || *end != '\0' || idx < 1 || idx > static_cast<long>(actions.size())) {
                std::printf("invalid selection\n");
                continue;
            }
            chosen = actions[static_cast<std::size_t>(idx - 1)];
        }
        auto r = engine::step(state, chosen);
        transcript.log(turn++, chosen, r.raw_reward, r.done);
        std::printf("%s\n[score %d/%d, step %d/100]\n", r.observation.c_str(), state.raw_score,
                    game.max_score, state.steps_taken);
    }
    std::printf("\n%s with %d/%d points in %d steps\n",
                state.done == engine::Progress::won ? "WON" : "LOST", state.raw_score, game.max_score,
                state.steps_taken);
    return kExitOk;
}

int cmd_inspect(const RunConfig& cfg, const std::string& game_id) {
    if (game_id.empty()) {
        auto fam = config::load_family(cfg.games_dir);
        gamegen::GameSet set;
        set.games = fam.games;
        std::printf("family at %s: %zu games\n", cfg.games_dir.c_str(), fam.games.size());
        std::printf("tier  types  games  total_max_score\n");
        for (const auto& r : gamegen::tier_reports(set)) {
            if (r.games == 0) continue;
            std::printf("%-5d %-6d %-6d %lld\n", r.tier, r.types, r.games, r.max_score_total);
        }
        std::printf("splits: train=%zu dev=%zu test1=%zu test2=%zu\n", fam.splits.train.size(),
                    fam.splits.dev.size(), fam.splits.test1.size(), fam.splits.test2.size());
        return kExitOk;
    }
    auto path = fs::path(cfg.games_dir) / "games" / (game_id + ".json");
    if (!fs::exists(path)) throw DataError("no such game: " + game_id);
    auto game = gamegen::load_game(path.string());
    std::printf("%s", gamegen::game_to_text(game).c_str());
    auto plan = gamegen::oracle_solve(game);
    std::printf("oracle solution (%zu steps, max score %d):\n", plan.size(), game.max_score);
    for (const auto& a : plan) std::printf("  %s\n", a.c_str());
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"cookbench: procedurally generated cooking text games with DRRN agents"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI config file");

    // the profile fills in defaults before the other flags bind, so explicit
    // flags always win over profile values
    std::string profile = "desk";
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--profile" && i + 1 < argc) profile = argv[i + 1];
        if (arg.rfind("--profile=", 0) == 0) profile = arg.substr(10);
    }
    RunConfig cfg;
    try {
        config::apply_profile(cfg, profile);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    std::vector<int> types_per_tier;
    std::string strategy_name = "go-room";

    app.add_option("--profile", profile, "scale profile: desk or paper")->capture_default_str();
    app.add_option("--games", cfg.games_dir, "games directory")->capture_default_str();
    app.add_option("--checkpoints", cfg.checkpoints_dir, "checkpoints directory")->capture_default_str();
    app.add_option("--reports", cfg.reports_dir, "reports directory")->capture_default_str();
    app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    app.add_option("--workers", cfg.workers, "worker threads (1 = bit-reproducible)")->capture_default_str();
    app.add_option("--strategy", strategy_name, "go strategy: go-cardinal, go-random, go-room")
        ->capture_default_str();

    app.fallthrough();

    auto* gen = app.add_subcommand("gen", "generate a game family with splits");
    gen->fallthrough();
    bool force = false;
    gen->add_option("--types-per-tier", types_per_tier, "six type counts, one per tier")->expected(6);
    gen->add_option("--games-per-type", cfg.family.games_per_type, "games per type");
    gen->add_option("--dev-count", cfg.dev_count, "dev split size");
    gen->add_flag("--force", force, "replace existing output");

    auto* train = app.add_subcommand("train", "train an agent (curriculum or mixed)");
    train->fallthrough();
    TrainContext tctx;
    train->add_option("--mode", tctx.mode, "curric or mixed")->capture_default_str();
    train->add_flag("--resume", tctx.resume, "continue from existing checkpoints");
    train->add_option("--init-checkpoint", tctx.init_checkpoint,
                      "start from this checkpoint instead of a fresh initialization");
    train->add_option("--observation-steps", cfg.train.observation_steps, "env steps before updates");
    train->add_option("--replay-capacity", cfg.train.replay_capacity, "replay memory entries");
    train->add_option("--batch", cfg.train.batch_size, "minibatch size");
    train->add_option("--lr", cfg.train.lr, "Adam learning rate");
    train->add_option("--gamma", cfg.train.gamma, "discount factor");
    train->add_option("--stage-steps", cfg.train.stage_steps, "env steps per curriculum stage");
    train->add_option("--epsilon-horizon", cfg.train.epsilon_horizon, "epsilon decay steps per stage");
    train->add_option("--epsilon-end", cfg.train.epsilon_end, "terminal exploration rate");
    train->add_option("--mixed-epsilon-horizon", cfg.train.mixed_epsilon_horizon,
                      "epsilon decay steps for mixed training");
    train->add_option("--target-sync", cfg.train.target_sync_every,
                      "train steps between target syncs (0 disables the frozen target)");
    train->add_option("--eval-every", cfg.train.eval_every, "train steps between dev evaluations");
    train->add_option("--dev-eval-cap", cfg.train.dev_eval_cap, "dev games per evaluation");
    train->add_option("--dev-eval-episodes", cfg.train.dev_eval_episodes, "episodes per dev game");
    train->add_option("--early-stop-dev", cfg.train.early_stop_dev_pct,
                      "stop a stage once dev %% reaches this (negative disables)");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on held-out games");
    eval->fallthrough();
    std::string checkpoint, split_sel = "both", policy_name = "greedy";
    eval->add_option("--checkpoint", checkpoint, "checkpoint file (not needed for --policy random)");
    eval->add_option("--policy", policy_name, "random, greedy, eps, sampling, linucb")
        ->capture_default_str();
    eval->add_option("--split", split_sel, "test1, test2, both, dev")->capture_default_str();
    eval->add_option("--episodes", cfg.eval.episodes, "episodes per game")->capture_default_str();
    eval->add_option("--eval-epsilon", cfg.eval.epsilon, "epsilon for the eps policy");
    eval->add_option("--temperature", cfg.eval.temperature, "Gumbel sampling temperature");
    eval->add_option("--bandit-lambda", cfg.eval.bandit_lambda, "LinUCB ridge strength");
    eval->add_flag("--bandit-reset-per-episode", cfg.eval.bandit_reset_per_episode,
                   "reset LinUCB state every episode instead of per game");

    auto* play = app.add_subcommand("play", "play a game interactively in the terminal");
    play->fallthrough();
    std::string game_id, transcript_path;
    bool oracle_mode = false;
    play->add_option("--game", game_id, "game id")->required();
    play->add_flag("--oracle", oracle_mode, "replay the oracle solution instead of asking");
    play->add_option("--transcript", transcript_path, "write a tab-separated transcript here");

    auto* inspect = app.add_subcommand("inspect", "show family summary or one game with its oracle plan");
    inspect->fallthrough();
    std::string inspect_id;
    inspect->add_option("--game", inspect_id, "game id (omit for the family summary)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (!types_per_tier.empty()) {
            for (std::size_t i = 0; i < 6; ++i) cfg.family.types_per_tier[i] = types_per_tier[i];
        }
        auto strategy = mapfam::strategy_from_string(strategy_name);
        if (!strategy) throw ConfigError("unknown strategy '" + strategy_name + "'");
        cfg.strategy = *strategy;
        cfg.family.seed = cfg.seed;

        if (gen->parsed()) return cmd_gen(cfg, force);
        if (train->parsed()) {
            tctx.cfg = cfg;
            return cmd_train(tctx);
        }
        if (eval->parsed()) return cmd_eval(cfg, checkpoint, split_sel, policy_name);
        if (play->parsed()) return cmd_play(cfg, game_id, oracle_mode, transcript_path);
        if (inspect->parsed()) return cmd_inspect(cfg, inspect_id);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "training diverged: %s\n", e.what());
        return kExitDivergence;
    } catch (const neural::ShapeError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const gamegen::UnsolvableGame& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}

}  // namespace cookbench::cli
