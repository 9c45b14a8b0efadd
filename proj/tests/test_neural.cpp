#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cookbench/neural.hpp"
#include "oracles.hpp"

using namespace cookbench;
using namespace cookbench::neural;

namespace {

NetConfig tiny_config() {
    NetConfig cfg;
    cfg.vocab_size = 50;
    cfg.embed_dim = 8;
    cfg.max_positions = 64;
    cfg.conv_widths = {3, 4, 5};
    cfg.filters_per_width = 4;
    cfg.recurrent_units = 8;
    return cfg;
}

NetConfig paper_config(std::int32_t vocab) {
    NetConfig cfg;
    cfg.vocab_size = vocab;
    return cfg;
}

std::vector<std::int32_t> random_tokens(Rng& rng, std::size_t n, std::int32_t vocab) {
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(static_cast<std::int32_t>(rng.uniform_int(2, vocab - 1)));
    }
    return out;
}

}  // namespace

TEST_CASE("encode_state: all-pad input is determined solely by filter biases") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 11);
    std::vector<std::int32_t> pads(7, kPadToken);
    auto h = encode_state(p, std::span<const std::int32_t>(pads));
    std::size_t idx = 0;
    for (std::size_t wi = 0; wi < cfg.conv_widths.size(); ++wi) {
        for (std::int32_t f = 0; f < cfg.filters_per_width; ++f) {
            double b = p.conv_b[wi].data[static_cast<std::size_t>(f)];
            CHECK(h[idx++] == doctest::Approx(std::max(0.0, b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("encode_state: output dim is 96 for the paper configuration") {
    auto cfg = paper_config(64);
    CHECK(cfg.state_dim() == 96);
    auto p = QNetworkParams<float>::init(cfg, 3);
    Rng rng(5);
    for (std::size_t len : {5u, 17u, 300u}) {
        auto toks = random_tokens(rng, len, cfg.vocab_size);
        auto h = encode_state(p, std::span<const std::int32_t>(toks));
        CHECK(h.size() == 96);
    }
}

TEST_CASE("encode_state matches the naive conv oracle on a 10-token example") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 99);
    Rng rng(123);
    auto toks = random_tokens(rng, 10, cfg.vocab_size);
    auto h = encode_state(p, std::span<const std::int32_t>(toks));
    auto ref = oracles::naive_encode_state(p, toks);
    REQUIRE(h.size() == ref.size());
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("encode_state rejects over-length input and bad tokens") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 1);
    std::vector<std::int32_t> too_long(static_cast<std::size_t>(cfg.max_positions) + 1, 2);
    CHECK_THROWS_AS(encode_state(p, std::span<const std::int32_t>(too_long)), ShapeError);
    std::vector<std::int32_t> bad = {2, 3, cfg.vocab_size};
    CHECK_THROWS_AS(encode_state(p, std::span<const std::int32_t>(bad)), ShapeError);
}

TEST_CASE("encode_state is deterministic") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 7);
    Rng rng(9);
    auto toks = random_tokens(rng, 23, cfg.vocab_size);
    auto a = encode_state(p, std::span<const std::int32_t>(toks));
    auto b = encode_state(p, std::span<const std::int32_t>(toks));
    CHECK(a == b);
}

TEST_CASE("encode_action: single token equals one naive cell step") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 21);
    std::vector<std::int32_t> one = {7};
    auto h = encode_action(p, std::span<const std::int32_t>(one));
    auto ref = oracles::naive_encode_action(p, one);
    REQUIRE(h.size() == ref.size());
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("encode_action matches the naive recurrence on a 3-token action") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 22);
    std::vector<std::int32_t> toks = {5, 17, 40};
    auto h = encode_action(p, std::span<const std::int32_t>(toks));
    auto ref = oracles::naive_encode_action(p, toks);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("encode_action: distinct actions give distinct encodings; empty action throws") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 23);
    std::vector<std::int32_t> a = {3, 9, 12, 4, 8};  // e.g. "take yellow potato from fridge"
    std::vector<std::int32_t> b = {6, 14, 12};       // e.g. "dice purple potato"
    auto ha = encode_action(p, std::span<const std::int32_t>(a));
    auto hb = encode_action(p, std::span<const std::int32_t>(b));
    CHECK(ha != hb);
    std::vector<std::int32_t> empty;
    CHECK_THROWS_AS(encode_action(p, std::span<const std::int32_t>(empty)), ShapeError);
}

TEST_CASE("q_values: zero W gives zero scores; size matches action count; loop oracle agrees") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 31);
    Rng rng(77);
    auto toks = random_tokens(rng, 12, cfg.vocab_size);
    auto h_s = encode_state(p, std::span<const std::int32_t>(toks));
    std::vector<std::vector<double>> h_as;
    for (int i = 0; i < 5; ++i) {
        auto at = random_tokens(rng, 3, cfg.vocab_size);
        h_as.push_back(encode_action(p, std::span<const std::int32_t>(at)));
    }
    auto q = q_values(p, std::span<const double>(h_s), h_as);
    CHECK(q.size() == h_as.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        CHECK(q[i] == doctest::Approx(oracles::naive_q(p, h_s, h_as[i])).epsilon(1e-12));
    }

    auto pz = p;
    std::fill(pz.bilinear.data.begin(), pz.bilinear.data.end(), 0.0);
    auto qz = q_values(pz, std::span<const double>(h_s), h_as);
    for (double v : qz) CHECK(v == 0.0);

    CHECK_THROWS_AS(q_values(p, std::span<const double>(h_s), {}), ShapeError);
}

namespace {

std::vector<Transition> make_batch(Rng& rng, const NetConfig& cfg, std::size_t n) {
    std::vector<Transition> batch;
    for (std::size_t i = 0; i < n; ++i) {
        Transition tr;
        tr.state_tokens = random_tokens(rng, 5 + rng.uniform_u64(3), cfg.vocab_size);
        tr.action_tokens = random_tokens(rng, 1 + rng.uniform_u64(4), cfg.vocab_size);
        tr.shaped_reward = rng.uniform_real(-1.0, 1.0);
        tr.terminal = rng.chance(0.25);
        if (!tr.terminal) {
            tr.next_state_tokens = random_tokens(rng, 6 + rng.uniform_u64(8), cfg.vocab_size);
            std::size_t n_actions = 1 + rng.uniform_u64(4);
            for (std::size_t a = 0; a < n_actions; ++a) {
                tr.next_action_tokens.push_back(random_tokens(rng, 1 + rng.uniform_u64(4), cfg.vocab_size));
            }
        }
        batch.push_back(std::move(tr));
    }
    return batch;
}

double td_loss_only(const QNetworkParams<double>& p, const QNetworkParams<double>& target,
                    const std::vector<Transition>& batch, double gamma) {
    // forward-only recomputation used by the finite-difference oracle
    double loss = 0.0;
    for (const auto& tr : batch) {
        double y = tr.shaped_reward;
        if (!tr.terminal) {
            auto h2 = encode_state(target, std::span<const std::int32_t>(tr.next_state_tokens));
            double best = -1e300;
            for (const auto& a : tr.next_action_tokens) {
                auto ha = encode_action(target, std::span<const std::int32_t>(a));
                best = std::max(best, oracles::naive_q(target, h2, ha));
            }
            y += gamma * best;
        }
        auto hs = encode_state(p, std::span<const std::int32_t>(tr.state_tokens));
        auto ha = encode_action(p, std::span<const std::int32_t>(tr.action_tokens));
        double err = oracles::naive_q(p, hs, ha) - y;
        loss += err * err;
    }
    return loss / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("td_loss: gamma=0 target equals the shaped reward") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 41);
    Rng rng(17);
    auto batch = make_batch(rng, cfg, 6);
    QNetworkParams<double> grads;
    GradWorkspace<double> ws;
    double loss0 = td_loss_and_grads(p, p, batch, 0.0, 1, grads, ws);
    // with gamma 0 the target reduces to r for every transition
    double expect = 0.0;
    for (const auto& tr : batch) {
        auto hs = encode_state(p, std::span<const std::int32_t>(tr.state_tokens));
        auto ha = encode_action(p, std::span<const std::int32_t>(tr.action_tokens));
        double err = oracles::naive_q(p, hs, ha) - tr.shaped_reward;
        expect += err * err;
    }
    expect /= static_cast<double>(batch.size());
    CHECK(loss0 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("td_loss: terminal transition with Q equal to target contributes zero gradient") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 42);
    Rng rng(18);
    Transition tr;
    tr.state_tokens = random_tokens(rng, 8, cfg.vocab_size);
    tr.action_tokens = random_tokens(rng, 3, cfg.vocab_size);
    tr.terminal = true;
    auto hs = encode_state(p, std::span<const std::int32_t>(tr.state_tokens));
    auto ha = encode_action(p, std::span<const std::int32_t>(tr.action_tokens));
    tr.shaped_reward = q_values(p, std::span<const double>(hs), {ha})[0];  // y == Q exactly
    QNetworkParams<double> grads;
    GradWorkspace<double> ws;
    double loss = td_loss_and_grads(p, p, {tr}, 0.9, 1, grads, ws);
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-20));
    grads.for_each_tensor([&](const std::string&, Tensor<double>& t) {
        for (double v : t.data) CHECK(v == 0.0);
    });
}

namespace {

// Central differences are only valid where the loss is locally smooth: the
// max-pool argmax must not flip and no relu may sit on its kink within the
// perturbation radius. Returns the smallest such margin over the batch.
double pool_smoothness_margin(const QNetworkParams<double>& p, const std::vector<Transition>& batch) {
    const NetConfig& cfg = p.cfg;
    const int E = cfg.embed_dim;
    double margin = 1e300;
    for (const auto& tr : batch) {
        const auto& tokens = tr.state_tokens;
        int Tc = std::max<int>(static_cast<int>(tokens.size()), cfg.max_conv_width());
        std::vector<std::vector<double>> x(static_cast<std::size_t>(Tc),
                                           std::vector<double>(static_cast<std::size_t>(E), 0.0));
        for (int t = 0; t < static_cast<int>(tokens.size()); ++t) {
            if (tokens[static_cast<std::size_t>(t)] == 0) continue;
            for (int c = 0; c < E; ++c) {
                x[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] =
                    p.word_emb.data[static_cast<std::size_t>(tokens[static_cast<std::size_t>(t)] * E + c)] +
                    p.pos_emb.data[static_cast<std::size_t>(t * E + c)];
            }
        }
        for (std::size_t wi = 0; wi < cfg.conv_widths.size(); ++wi) {
            const int w = cfg.conv_widths[wi];
            for (int f = 0; f < cfg.filters_per_width; ++f) {
                std::vector<double> pres;
                for (int t = 0; t + w <= Tc; ++t) {
                    double pre = p.conv_b[wi].data[static_cast<std::size_t>(f)];
                    for (int k = 0; k < w; ++k) {
                        for (int c = 0; c < E; ++c) {
                            pre += x[static_cast<std::size_t>(t + k)][static_cast<std::size_t>(c)] *
                                   p.conv_w[wi].data[static_cast<std::size_t>((k * E + c) * cfg.filters_per_width + f)];
                        }
                    }
                    pres.push_back(pre);
                }
                std::vector<double> acts;
                for (double pre : pres) acts.push_back(std::max(0.0, pre));
                std::sort(acts.rbegin(), acts.rend());
                if (acts[0] > 0.0) {
                    // winner must sit clear of its relu kink and of the runner-up
                    margin = std::min(margin, acts[0]);
                    if (acts.size() > 1) margin = std::min(margin, acts[0] - acts[1]);
                } else {
                    // pool output is flat zero; nearest pre must stay below the kink
                    double closest = 1e300;
                    for (double pre : pres) closest = std::min(closest, -pre);
                    margin = std::min(margin, closest);
                }
            }
        }
    }
    return margin;
}

}  // namespace

TEST_CASE("gradients match central finite differences for every parameter group") {
    auto cfg = tiny_config();
    const double gamma = 0.9;

    // Fixed seeds chosen so the pooling margins comfortably exceed what a
    // 1e-3 single-parameter perturbation can move any pre-activation by
    // (worst case ~4e-3 through a repeated word embedding).
    QNetworkParams<double> p;
    QNetworkParams<double> target;
    std::vector<Transition> batch;
    bool found = false;
    for (std::uint64_t seed = 1; seed <= 2000 && !found; ++seed) {
        p = QNetworkParams<double>::init(cfg, derive_seed(seed, 1));
        target = QNetworkParams<double>::init(cfg, derive_seed(seed, 2));
        Rng rng(derive_seed(seed, 3));
        batch = make_batch(rng, cfg, 3);
        found = pool_smoothness_margin(p, batch) > 0.008;
    }
    REQUIRE(found);

    QNetworkParams<double> grads;
    GradWorkspace<double> ws;
    td_loss_and_grads(p, target, batch, gamma, 1, grads, ws);

    const double step = 1e-3;
    int checked = 0, skipped_both_zero = 0;
    grads.for_each_tensor([&](const std::string& name, Tensor<double>& gt) {
        Tensor<double>* pt = nullptr;
        p.for_each_tensor([&](const std::string& n, Tensor<double>& t) {
            if (n == name) pt = &t;
        });
        REQUIRE(pt != nullptr);
        for (std::size_t i = 0; i < gt.data.size(); ++i) {
            double analytic = gt.data[i];
            double fd = oracles::central_difference([&] { return td_loss_only(p, target, batch, gamma); },
                                                    &pt->data[i], step);
            double denom = std::fabs(analytic) + std::fabs(fd);
            if (denom < 1e-10) {
                ++skipped_both_zero;
                continue;
            }
            double rel = std::fabs(analytic - fd) / denom;
            if (rel >= 1e-4) {
                CAPTURE(name);
                CAPTURE(i);
                CAPTURE(analytic);
                CAPTURE(fd);
            }
            REQUIRE(rel < 1e-4);
            ++checked;
        }
    });
    CHECK(checked > 500);  // the sweep actually exercised real parameters
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 51);
    auto before = p;
    auto grads = QNetworkParams<double>::zeros(cfg);
    auto adam = AdamState<double>::zeros(cfg);
    adam_step(p, grads, adam, 1e-3);
    bool same = true;
    p.for_each_tensor([&](const std::string& name, Tensor<double>& t) {
        const Tensor<double>* bt = nullptr;
        before.for_each_tensor([&](const std::string& n, Tensor<double>& b) {
            if (n == name) bt = &b;
        });
        if (t.data != bt->data) same = false;
    });
    CHECK(same);
}

TEST_CASE("adam: first step moves each parameter by about -sign(g) * lr") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::zeros(cfg);
    auto grads = QNetworkParams<double>::zeros(cfg);
    grads.bilinear.data[0] = 0.37;
    grads.bilinear.data[1] = -2.4;
    auto adam = AdamState<double>::zeros(cfg);
    const double lr = 1e-3;
    adam_step(p, grads, adam, lr);
    // bias-corrected first step: -lr * g / (|g| + eps) = -sign(g) * lr * (1 - tiny)
    CHECK(p.bilinear.data[0] == doctest::Approx(-lr).epsilon(1e-6));
    CHECK(p.bilinear.data[1] == doctest::Approx(lr).epsilon(1e-6));
    CHECK(p.bilinear.data[2] == 0.0);
}

TEST_CASE("adam matches a reference element-wise trace for 5 steps") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<double>::init(cfg, 61);
    auto adam = AdamState<double>::zeros(cfg);
    // flatten to drive the reference implementation
    std::vector<double> flat;
    p.for_each_tensor([&](const std::string&, Tensor<double>& t) {
        flat.insert(flat.end(), t.data.begin(), t.data.end());
    });
    oracles::ReferenceAdam ref(flat.size());
    Rng rng(62);
    for (int step = 0; step < 5; ++step) {
        auto grads = QNetworkParams<double>::zeros(cfg);
        std::vector<double> gflat;
        grads.for_each_tensor([&](const std::string&, Tensor<double>& t) {
            for (auto& v : t.data) v = rng.uniform_real(-1.0, 1.0);
            gflat.insert(gflat.end(), t.data.begin(), t.data.end());
        });
        adam_step(p, grads, adam, 1e-2);
        ref.step(flat, gflat, 1e-2);
    }
    std::size_t k = 0;
    p.for_each_tensor([&](const std::string&, Tensor<double>& t) {
        for (double v : t.data) {
            CHECK(v == doctest::Approx(flat[k]).epsilon(1e-10));
            ++k;
        }
    });
}

TEST_CASE("checkpoint round-trip: bit-identical parameters and forward outputs") {
    auto cfg = tiny_config();
    auto p = QNetworkParams<float>::init(cfg, 71);
    auto adam = AdamState<float>::zeros(cfg);
    adam.t = 17;
    CheckpointMeta meta;
    meta.stage = "tier1";
    meta.train_step = 12345;
    meta.vocab_hash = 0xabcdef;

    auto path = std::filesystem::temp_directory_path() / "cookbench_ckpt_test.bin";
    save_checkpoint(path.string(), p, adam, meta);
    auto loaded = load_checkpoint<float>(path.string());

    CHECK(loaded.meta.stage == "tier1");
    CHECK(loaded.meta.train_step == 12345);
    CHECK(loaded.meta.vocab_hash == 0xabcdef);
    CHECK(loaded.adam.t == 17);

    bool identical = true;
    p.for_each_tensor([&](const std::string& name, Tensor<float>& t) {
        Tensor<float>* lt = nullptr;
        loaded.params.for_each_tensor([&](const std::string& n, Tensor<float>& x) {
            if (n == name) lt = &x;
        });
        if (!lt || lt->data != t.data) identical = false;
    });
    CHECK(identical);

    Rng rng(72);
    auto toks = random_tokens(rng, 9, cfg.vocab_size);
    auto h1 = encode_state(p, std::span<const std::int32_t>(toks));
    auto h2 = encode_state(loaded.params, std::span<const std::int32_t>(toks));
    CHECK(h1 == h2);  // exact bits

    std::filesystem::remove(path);
}

TEST_CASE("checkpoint: corrupt and mismatched files are rejected") {
    auto path = std::filesystem::temp_directory_path() / "cookbench_ckpt_corrupt.bin";
    {
        std::ofstream f(path, std::ios::binary);
        f << "not a checkpoint";
    }
    CHECK_THROWS_AS(load_checkpoint<float>(path.string()), DataError);

    auto cfg = tiny_config();
    auto p = QNetworkParams<float>::init(cfg, 81);
    save_checkpoint(path.string(), p, AdamState<float>::zeros(cfg), {});
    CHECK_THROWS_AS(load_checkpoint<double>(path.string()), DataError);  // scalar width mismatch
    std::filesystem::remove(path);
}
