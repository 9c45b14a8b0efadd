#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cookbench/rng.hpp"
#include "cookbench/util.hpp"

namespace cookbench::neural {

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& m) : std::runtime_error(m) {}
};

template <typename S>
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> shp) : shape(std::move(shp)) {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        data.assign(static_cast<std::size_t>(n), S(0));
    }

    std::int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    S* row(std::int64_t r) { return data.data() + r * cols(); }
    const S* row(std::int64_t r) const { return data.data() + r * cols(); }

    void check_same_shape(const Tensor& o, const char* what) const {
        if (shape != o.shape) throw ShapeError(std::string("shape mismatch in ") + what);
    }
};

struct NetConfig {
    std::int32_t vocab_size = 0;
    std::int32_t embed_dim = 64;
    std::int32_t max_positions = 1000;
    std::vector<std::int32_t> conv_widths = {3, 4, 5};
    std::int32_t filters_per_width = 32;
    std::int32_t recurrent_units = 32;

    std::int32_t state_dim() const { return static_cast<std::int32_t>(conv_widths.size()) * filters_per_width; }
    std::int32_t max_conv_width() const {
        std::int32_t m = 1;
        for (auto w : conv_widths) m = std::max(m, w);
        return m;
    }
    bool operator==(const NetConfig&) const = default;
};

inline constexpr std::int32_t kPadToken = 0;

// All learnable arrays of the DRRN. The same structure doubles as the gradient
// container and as the Adam moment containers.
template <typename S>
struct QNetworkParams {
    NetConfig cfg;
    Tensor<S> word_emb;               // V x E
    Tensor<S> pos_emb;                // P x E
    std::vector<Tensor<S>> conv_w;    // per width: (w*E) x F
    std::vector<Tensor<S>> conv_b;    // per width: F
    Tensor<S> lstm_wx;                // E x 4H, gate order [i f g o]
    Tensor<S> lstm_wh;                // H x 4H
    Tensor<S> lstm_b;                 // 4H
    Tensor<S> bilinear;               // state_dim x H

    static QNetworkParams zeros(const NetConfig& cfg) {
        QNetworkParams p;
        p.cfg = cfg;
        p.word_emb = Tensor<S>({cfg.vocab_size, cfg.embed_dim});
        p.pos_emb = Tensor<S>({cfg.max_positions, cfg.embed_dim});
        for (auto w : cfg.conv_widths) {
            p.conv_w.push_back(Tensor<S>({static_cast<std::int64_t>(w) * cfg.embed_dim, cfg.filters_per_width}));
            p.conv_b.push_back(Tensor<S>({cfg.filters_per_width}));
        }
        p.lstm_wx = Tensor<S>({cfg.embed_dim, 4 * cfg.recurrent_units});
        p.lstm_wh = Tensor<S>({cfg.recurrent_units, 4 * cfg.recurrent_units});
        p.lstm_b = Tensor<S>({4 * cfg.recurrent_units});
        p.bilinear = Tensor<S>({cfg.state_dim(), cfg.recurrent_units});
        return p;
    }

    static QNetworkParams init(const NetConfig& cfg, std::uint64_t seed) {
        QNetworkParams p = zeros(cfg);
        auto fill_uniform = [&](Tensor<S>& t, const char* name, double limit) {
            Rng rng(derive_seed(seed, fnv1a64(name)));
            for (auto& v : t.data) v = static_cast<S>(rng.uniform_real(-limit, limit));
        };
        fill_uniform(p.word_emb, "word_emb", 0.05);
        fill_uniform(p.pos_emb, "pos_emb", 0.05);
        for (std::size_t i = 0; i < p.conv_w.size(); ++i) {
            double fan_in = static_cast<double>(p.conv_w[i].rows());
            double limit = std::sqrt(6.0 / (fan_in + cfg.filters_per_width));
            fill_uniform(p.conv_w[i], ("conv_w" + std::to_string(cfg.conv_widths[i])).c_str(), limit);
        }
        fill_uniform(p.lstm_wx, "lstm_wx", std::sqrt(6.0 / (cfg.embed_dim + 4.0 * cfg.recurrent_units)));
        fill_uniform(p.lstm_wh, "lstm_wh", std::sqrt(6.0 / (cfg.recurrent_units + 4.0 * cfg.recurrent_units)));
        // forget-gate bias starts at 1
        for (std::int32_t u = 0; u < cfg.recurrent_units; ++u) {
            p.lstm_b.data[static_cast<std::size_t>(cfg.recurrent_units + u)] = S(1);
        }
        fill_uniform(p.bilinear, "bilinear", std::sqrt(6.0 / (cfg.state_dim() + cfg.recurrent_units)));
        return p;
    }

    void for_each_tensor(const std::function<void(const std::string&, Tensor<S>&)>& fn) {
        fn("word_emb", word_emb);
        fn("pos_emb", pos_emb);
        for (std::size_t i = 0; i < conv_w.size(); ++i) {
            fn("conv_w" + std::to_string(cfg.conv_widths[i]), conv_w[i]);
            fn("conv_b" + std::to_string(cfg.conv_widths[i]), conv_b[i]);
        }
        fn("lstm_wx", lstm_wx);
        fn("lstm_wh", lstm_wh);
        fn("lstm_b", lstm_b);
        fn("bilinear", bilinear);
    }

    void for_each_tensor(const std::function<void(const std::string&, const Tensor<S>&)>& fn) const {
        const_cast<QNetworkParams*>(this)->for_each_tensor(
            [&](const std::string& n, Tensor<S>& t) { fn(n, t); });
    }

    void set_zero() {
        for_each_tensor([](const std::string&, Tensor<S>& t) { std::fill(t.data.begin(), t.data.end(), S(0)); });
    }

    void accumulate(const QNetworkParams& other) {
        word_emb.check_same_shape(other.word_emb, "accumulate");
        for_each_tensor([&](const std::string& name, Tensor<S>& t) {
            const Tensor<S>* src = nullptr;
            const_cast<QNetworkParams&>(other).for_each_tensor([&](const std::string& n, Tensor<S>& s) {
                if (n == name) src = &s;
            });
            for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] += src->data[i];
        });
    }
};

// ---------------------------------------------------------------------------
// trajectory encoder: word+position embeddings -> conv banks -> relu -> maxpool

template <typename S>
struct StateCache {
    std::int64_t n_tokens = 0;   // real tokens
    std::int64_t padded_len = 0; // >= max conv width
    std::vector<std::int32_t> tokens;
    std::vector<S> x;  // padded_len * E, zero rows for pad positions
    // per width: winning window index and pre-activation per filter
    std::vector<std::vector<std::int32_t>> argmax_t;
    std::vector<std::vector<S>> pre_at_max;
};

template <typename S>
void encode_state(const QNetworkParams<S>& p, std::span<const std::int32_t> tokens, std::vector<S>& h_out,
                  StateCache<S>* cache) {
    const NetConfig& cfg = p.cfg;
    const std::int64_t T = static_cast<std::int64_t>(tokens.size());
    if (T > cfg.max_positions) {
        throw ShapeError("encode_state: " + std::to_string(T) + " tokens exceed max_positions " +
                         std::to_string(cfg.max_positions) + " (caller must trim)");
    }
    const std::int64_t E = cfg.embed_dim;
    const std::int64_t Tc = std::max<std::int64_t>(T, cfg.max_conv_width());

    std::vector<S> x(static_cast<std::size_t>(Tc * E), S(0));
    for (std::int64_t t = 0; t < T; ++t) {
        std::int32_t tok = tokens[static_cast<std::size_t>(t)];
        if (tok < 0 || tok >= cfg.vocab_size) throw ShapeError("encode_state: token id out of range");
        if (tok == kPadToken) continue;  // pad contributes a zero vector
        const S* we = p.word_emb.row(tok);
        const S* pe = p.pos_emb.row(t);
        S* xt = x.data() + t * E;
        for (std::int64_t c = 0; c < E; ++c) xt[c] = we[c] + pe[c];
    }

    const std::int32_t F = cfg.filters_per_width;
    h_out.assign(static_cast<std::size_t>(cfg.state_dim()), S(0));
    if (cache) {
        cache->n_tokens = T;
        cache->padded_len = Tc;
        cache->tokens.assign(tokens.begin(), tokens.end());
        cache->x = x;
        cache->argmax_t.assign(cfg.conv_widths.size(), {});
        cache->pre_at_max.assign(cfg.conv_widths.size(), {});
    }

    std::vector<S> pre(static_cast<std::size_t>(F));
    for (std::size_t wi = 0; wi < cfg.conv_widths.size(); ++wi) {
        const std::int32_t w = cfg.conv_widths[wi];
        const Tensor<S>& K = p.conv_w[wi];
        const Tensor<S>& b = p.conv_b[wi];
        std::vector<S> best(static_cast<std::size_t>(F), S(0));
        std::vector<S> best_pre(static_cast<std::size_t>(F), S(0));
        std::vector<std::int32_t> best_t(static_cast<std::size_t>(F), 0);
        const std::int64_t windows = Tc - w + 1;
        for (std::int64_t t = 0; t < windows; ++t) {
            for (std::int32_t f = 0; f < F; ++f) pre[static_cast<std::size_t>(f)] = b.data[static_cast<std::size_t>(f)];
            const S* xwin = x.data() + t * E;
            for (std::int64_t kc = 0; kc < static_cast<std::int64_t>(w) * E; ++kc) {
                const S xv = xwin[kc];
                if (xv == S(0)) continue;
                const S* krow = K.row(kc);
                for (std::int32_t f = 0; f < F; ++f) pre[static_cast<std::size_t>(f)] += xv * krow[f];
            }
            if (t == 0) {
                best_pre = pre;
                for (std::int32_t f = 0; f < F; ++f) {
                    best[static_cast<std::size_t>(f)] = pre[static_cast<std::size_t>(f)] > S(0)
                                                            ? pre[static_cast<std::size_t>(f)]
                                                            : S(0);
                }
            } else {
                for (std::int32_t f = 0; f < F; ++f) {
                    S a = pre[static_cast<std::size_t>(f)] > S(0) ? pre[static_cast<std::size_t>(f)] : S(0);
                    if (a > best[static_cast<std::size_t>(f)]) {
                        best[static_cast<std::size_t>(f)] = a;
                        best_pre[static_cast<std::size_t>(f)] = pre[static_cast<std::size_t>(f)];
                        best_t[static_cast<std::size_t>(f)] = static_cast<std::int32_t>(t);
                    }
                }
            }
        }
        for (std::int32_t f = 0; f < F; ++f) {
            h_out[wi * static_cast<std::size_t>(F) + static_cast<std::size_t>(f)] = best[static_cast<std::size_t>(f)];
        }
        if (cache) {
            cache->argmax_t[wi] = std::move(best_t);
            cache->pre_at_max[wi] = std::move(best_pre);
        }
    }
}

template <typename S>
std::vector<S> encode_state(const QNetworkParams<S>& p, std::span<const std::int32_t> tokens) {
    std::vector<S> h;
    encode_state(p, tokens, h, static_cast<StateCache<S>*>(nullptr));
    return h;
}

template <typename S>
void backward_state(const QNetworkParams<S>& p, const StateCache<S>& cache, std::span<const S> dh,
                    QNetworkParams<S>& grads) {
    const NetConfig& cfg = p.cfg;
    const std::int64_t E = cfg.embed_dim;
    const std::int32_t F = cfg.filters_per_width;
    if (dh.size() != static_cast<std::size_t>(cfg.state_dim())) throw ShapeError("backward_state: bad dh size");

    std::vector<S> dx(cache.x.size(), S(0));
    for (std::size_t wi = 0; wi < cfg.conv_widths.size(); ++wi) {
        const std::int32_t w = cfg.conv_widths[wi];
        Tensor<S>& dK = grads.conv_w[wi];
        Tensor<S>& db = grads.conv_b[wi];
        const Tensor<S>& K = p.conv_w[wi];
        for (std::int32_t f = 0; f < F; ++f) {
            S g = dh[wi * static_cast<std::size_t>(F) + static_cast<std::size_t>(f)];
            if (g == S(0)) continue;
            if (cache.pre_at_max[wi][static_cast<std::size_t>(f)] <= S(0)) continue;  // relu off
            const std::int64_t t0 = cache.argmax_t[wi][static_cast<std::size_t>(f)];
            const S* xwin = cache.x.data() + t0 * E;
            db.data[static_cast<std::size_t>(f)] += g;
            for (std::int64_t kc = 0; kc < static_cast<std::int64_t>(w) * E; ++kc) {
                dK.data[static_cast<std::size_t>(kc * F + f)] += g * xwin[kc];
                dx[static_cast<std::size_t>(t0 * E + kc)] += g * K.data[static_cast<std::size_t>(kc * F + f)];
            }
        }
    }
    // embedding gradients; pad positions contributed zero vectors and get none
    for (std::int64_t t = 0; t < cache.n_tokens; ++t) {
        const std::int32_t tok = cache.tokens[static_cast<std::size_t>(t)];
        if (tok == kPadToken) continue;
        S* gw = grads.word_emb.row(tok);
        S* gp = grads.pos_emb.row(t);
        const S* dxt = dx.data() + t * E;
        for (std::int64_t c = 0; c < E; ++c) {
            gw[c] += dxt[c];
            gp[c] += dxt[c];
        }
    }
}

// ---------------------------------------------------------------------------
// action encoder: single-layer LSTM over word embeddings, last hidden state

template <typename S>
struct ActionCache {
    std::vector<std::int32_t> tokens;
    // per step: gates (i f g o), cell, tanh(cell), previous hidden
    std::vector<S> gates;   // T x 4H (post-nonlinearity)
    std::vector<S> cells;   // T x H
    std::vector<S> tanhc;   // T x H
    std::vector<S> hiddens; // (T+1) x H, row 0 = initial zeros
};

template <typename S>
void encode_action(const QNetworkParams<S>& p, std::span<const std::int32_t> tokens, std::vector<S>& h_out,
                   ActionCache<S>* cache) {
    const NetConfig& cfg = p.cfg;
    const std::int64_t T = static_cast<std::int64_t>(tokens.size());
    if (T == 0) throw ShapeError("encode_action: empty action token list");
    const std::int64_t E = cfg.embed_dim;
    const std::int64_t H = cfg.recurrent_units;

    std::vector<S> h(static_cast<std::size_t>(H), S(0));
    std::vector<S> c(static_cast<std::size_t>(H), S(0));
    std::vector<S> z(static_cast<std::size_t>(4 * H));
    if (cache) {
        cache->tokens.assign(tokens.begin(), tokens.end());
        cache->gates.assign(static_cast<std::size_t>(T * 4 * H), S(0));
        cache->cells.assign(static_cast<std::size_t>(T * H), S(0));
        cache->tanhc.assign(static_cast<std::size_t>(T * H), S(0));
        cache->hiddens.assign(static_cast<std::size_t>((T + 1) * H), S(0));
    }

    for (std::int64_t t = 0; t < T; ++t) {
        const std::int32_t tok = tokens[static_cast<std::size_t>(t)];
        if (tok < 0 || tok >= cfg.vocab_size) throw ShapeError("encode_action: token id out of range");
        for (std::int64_t u = 0; u < 4 * H; ++u) z[static_cast<std::size_t>(u)] = p.lstm_b.data[static_cast<std::size_t>(u)];
        if (tok != kPadToken) {
            const S* we = p.word_emb.row(tok);
            for (std::int64_t e = 0; e < E; ++e) {
                const S xv = we[e];
                if (xv == S(0)) continue;
                const S* wrow = p.lstm_wx.row(e);
                for (std::int64_t u = 0; u < 4 * H; ++u) z[static_cast<std::size_t>(u)] += xv * wrow[u];
            }
        }
        for (std::int64_t j = 0; j < H; ++j) {
            const S hv = h[static_cast<std::size_t>(j)];
            if (hv == S(0)) continue;
            const S* wrow = p.lstm_wh.row(j);
            for (std::int64_t u = 0; u < 4 * H; ++u) z[static_cast<std::size_t>(u)] += hv * wrow[u];
        }
        for (std::int64_t j = 0; j < H; ++j) {
            const S zi = z[static_cast<std::size_t>(j)];
            const S zf = z[static_cast<std::size_t>(H + j)];
            const S zg = z[static_cast<std::size_t>(2 * H + j)];
            const S zo = z[static_cast<std::size_t>(3 * H + j)];
            const S gi = S(1) / (S(1) + std::exp(-zi));
            const S gf = S(1) / (S(1) + std::exp(-zf));
            const S gg = std::tanh(zg);
            const S go = S(1) / (S(1) + std::exp(-zo));
            const S cnew = gf * c[static_cast<std::size_t>(j)] + gi * gg;
            const S tc = std::tanh(cnew);
            if (cache) {
                S* grow = cache->gates.data() + t * 4 * H;
                grow[j] = gi;
                grow[H + j] = gf;
                grow[2 * H + j] = gg;
                grow[3 * H + j] = go;
                cache->cells[static_cast<std::size_t>(t * H + j)] = cnew;
                cache->tanhc[static_cast<std::size_t>(t * H + j)] = tc;
            }
            c[static_cast<std::size_t>(j)] = cnew;
            h[static_cast<std::size_t>(j)] = go * tc;
        }
        if (cache) {
            std::copy(h.begin(), h.end(), cache->hiddens.begin() + (t + 1) * H);
        }
    }
    h_out = std::move(h);
}

template <typename S>
std::vector<S> encode_action(const QNetworkParams<S>& p, std::span<const std::int32_t> tokens) {
    std::vector<S> h;
    encode_action(p, tokens, h, static_cast<ActionCache<S>*>(nullptr));
    return h;
}

template <typename S>
void backward_action(const QNetworkParams<S>& p, const ActionCache<S>& cache, std::span<const S> dh_last,
                     QNetworkParams<S>& grads) {
    const NetConfig& cfg = p.cfg;
    const std::int64_t E = cfg.embed_dim;
    const std::int64_t H = cfg.recurrent_units;
    const std::int64_t T = static_cast<std::int64_t>(cache.tokens.size());
    if (dh_last.size() != static_cast<std::size_t>(H)) throw ShapeError("backward_action: bad dh size");

    std::vector<S> dh(dh_last.begin(), dh_last.end());
    std::vector<S> dc(static_cast<std::size_t>(H), S(0));
    std::vector<S> dz(static_cast<std::size_t>(4 * H));

    for (std::int64_t t = T - 1; t >= 0; --t) {
        const S* grow = cache.gates.data() + t * 4 * H;
        const S* hp = cache.hiddens.data() + t * H;  // previous hidden
        for (std::int64_t j = 0; j < H; ++j) {
            const S gi = grow[j];
            const S gf = grow[H + j];
            const S gg = grow[2 * H + j];
            const S go = grow[3 * H + j];
            const S tc = cache.tanhc[static_cast<std::size_t>(t * H + j)];
            const S c_prev = t > 0 ? cache.cells[static_cast<std::size_t>((t - 1) * H + j)] : S(0);

            const S dhj = dh[static_cast<std::size_t>(j)];
            const S dgo = dhj * tc;
            S dcj = dc[static_cast<std::size_t>(j)] + dhj * go * (S(1) - tc * tc);
            const S dgi = dcj * gg;
            const S dgf = dcj * c_prev;
            const S dgg = dcj * gi;

            dz[static_cast<std::size_t>(j)] = dgi * gi * (S(1) - gi);
            dz[static_cast<std::size_t>(H + j)] = dgf * gf * (S(1) - gf);
            dz[static_cast<std::size_t>(2 * H + j)] = dgg * (S(1) - gg * gg);
            dz[static_cast<std::size_t>(3 * H + j)] = dgo * go * (S(1) - go);
            dc[static_cast<std::size_t>(j)] = dcj * gf;
        }

        for (std::int64_t u = 0; u < 4 * H; ++u) {
            grads.lstm_b.data[static_cast<std::size_t>(u)] += dz[static_cast<std::size_t>(u)];
        }
        const std::int32_t tok = cache.tokens[static_cast<std::size_t>(t)];
        if (tok != kPadToken) {
            const S* we = p.word_emb.row(tok);
            S* gwe = grads.word_emb.row(tok);
            for (std::int64_t e = 0; e < E; ++e) {
                const S xv = we[e];
                S* gwrow = grads.lstm_wx.row(e);
                const S* wrow = p.lstm_wx.row(e);
                S dxe = S(0);
                for (std::int64_t u = 0; u < 4 * H; ++u) {
                    gwrow[u] += xv * dz[static_cast<std::size_t>(u)];
                    dxe += wrow[u] * dz[static_cast<std::size_t>(u)];
                }
                gwe[e] += dxe;
            }
        }
        std::fill(dh.begin(), dh.end(), S(0));
        for (std::int64_t j = 0; j < H; ++j) {
            const S hv = hp[j];
            S* gwrow = grads.lstm_wh.row(j);
            const S* wrow = p.lstm_wh.row(j);
            S dhj = S(0);
            for (std::int64_t u = 0; u < 4 * H; ++u) {
                gwrow[u] += hv * dz[static_cast<std::size_t>(u)];
                dhj += wrow[u] * dz[static_cast<std::size_t>(u)];
            }
            dh[static_cast<std::size_t>(j)] = dhj;
        }
    }
}

// ---------------------------------------------------------------------------
// bilinear scoring: Q(s, a_i) = h_s^T W h_a_i, one pass for the whole Q-vector

template <typename S>
std::vector<S> q_values(const QNetworkParams<S>& p, std::span<const S> h_s,
                        const std::vector<std::vector<S>>& h_actions) {
    const std::int64_t H = p.cfg.recurrent_units;
    const std::int64_t D = p.cfg.state_dim();
    if (h_actions.empty()) throw ShapeError("q_values: empty action list");
    if (h_s.size() != static_cast<std::size_t>(D)) throw ShapeError("q_values: bad h_s size");
    // u = W^T h_s, then Q_i = u . h_a_i
    std::vector<S> u(static_cast<std::size_t>(H), S(0));
    for (std::int64_t d = 0; d < D; ++d) {
        const S hv = h_s[static_cast<std::size_t>(d)];
        if (hv == S(0)) continue;
        const S* wrow = p.bilinear.row(d);
        for (std::int64_t j = 0; j < H; ++j) u[static_cast<std::size_t>(j)] += hv * wrow[j];
    }
    std::vector<S> q;
    q.reserve(h_actions.size());
    for (const auto& ha : h_actions) {
        if (ha.size() != static_cast<std::size_t>(H)) throw ShapeError("q_values: bad h_a size");
        S acc = S(0);
        for (std::int64_t j = 0; j < H; ++j) acc += u[static_cast<std::size_t>(j)] * ha[static_cast<std::size_t>(j)];
        q.push_back(acc);
    }
    return q;
}

template <typename S>
void backward_bilinear(const QNetworkParams<S>& p, std::span<const S> h_s, std::span<const S> h_a, S dq,
                       QNetworkParams<S>& grads, std::vector<S>& dh_s, std::vector<S>& dh_a) {
    const std::int64_t H = p.cfg.recurrent_units;
    const std::int64_t D = p.cfg.state_dim();
    dh_s.assign(static_cast<std::size_t>(D), S(0));
    dh_a.assign(static_cast<std::size_t>(H), S(0));
    for (std::int64_t d = 0; d < D; ++d) {
        const S* wrow = p.bilinear.row(d);
        S* gwrow = grads.bilinear.row(d);
        const S hv = h_s[static_cast<std::size_t>(d)];
        S acc = S(0);
        for (std::int64_t j = 0; j < H; ++j) {
            const S haj = h_a[static_cast<std::size_t>(j)];
            gwrow[j] += dq * hv * haj;
            acc += wrow[j] * haj;
            dh_a[static_cast<std::size_t>(j)] += dq * hv * wrow[j];
        }
        dh_s[static_cast<std::size_t>(d)] = dq * acc;
    }
}

// convenience: score one state against a list of candidate actions
template <typename S>
std::vector<S> score_actions(const QNetworkParams<S>& p, std::span<const std::int32_t> state_tokens,
                             const std::vector<std::vector<std::int32_t>>& action_tokens) {
    std::vector<S> h_s = encode_state(p, state_tokens);
    std::vector<std::vector<S>> h_as;
    h_as.reserve(action_tokens.size());
    for (const auto& a : action_tokens) h_as.push_back(encode_action(p, a));
    return q_values(p, std::span<const S>(h_s), h_as);
}

// ---------------------------------------------------------------------------
// TD loss

struct Transition {
    std::vector<std::int32_t> state_tokens;
    std::vector<std::int32_t> action_tokens;
    double shaped_reward = 0.0;
    bool terminal = false;
    std::vector<std::int32_t> next_state_tokens;
    std::vector<std::vector<std::int32_t>> next_action_tokens;
};

template <typename S>
using ActionEncodingCache = std::map<std::vector<std::int32_t>, std::vector<S>>;

// Per-worker gradient buffers, reused across training steps.
template <typename S>
struct GradWorkspace {
    std::vector<QNetworkParams<S>> per_thread;

    void ensure(const NetConfig& cfg, int workers) {
        if (static_cast<int>(per_thread.size()) != workers || per_thread.empty() ||
            !(per_thread[0].cfg == cfg)) {
            per_thread.clear();
            for (int i = 0; i < workers; ++i) per_thread.push_back(QNetworkParams<S>::zeros(cfg));
        } else {
            for (auto& g : per_thread) g.set_zero();
        }
    }
};

// Squared TD error averaged over the batch; gradients for every parameter.
// Targets y = r + gamma * max_a' Q_target(s', a'), or r when terminal.
template <typename S>
double td_loss_and_grads(const QNetworkParams<S>& params, const QNetworkParams<S>& target_params,
                         const std::vector<Transition>& batch, double gamma, int workers,
                         QNetworkParams<S>& grads, GradWorkspace<S>& ws,
                         ActionEncodingCache<S>* target_cache = nullptr) {
    if (batch.empty()) throw ShapeError("td_loss_and_grads: empty batch");
    if (!(params.cfg == target_params.cfg)) throw ShapeError("td_loss_and_grads: online/target config mismatch");
    const std::size_t B = batch.size();
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), B));

    // fill the target-side action encoding cache serially so the parallel part
    // is read-only
    ActionEncodingCache<S> local_cache;
    ActionEncodingCache<S>& cache = target_cache ? *target_cache : local_cache;
    for (const auto& tr : batch) {
        if (tr.terminal) continue;
        for (const auto& a : tr.next_action_tokens) {
            if (!cache.count(a)) cache.emplace(a, encode_action(target_params, a));
        }
    }

    ws.ensure(params.cfg, workers);
    std::vector<double> losses(B, 0.0);
    std::vector<std::string> errors(static_cast<std::size_t>(workers));

    parallel_for(B, workers, [&](std::size_t begin, std::size_t end, int tid) {
        try {
            QNetworkParams<S>& g = ws.per_thread[static_cast<std::size_t>(tid)];
            StateCache<S> scache;
            ActionCache<S> acache;
            std::vector<S> h_s, h_a, dh_s, dh_a;
            for (std::size_t i = begin; i < end; ++i) {
                const Transition& tr = batch[i];
                double y = tr.shaped_reward;
                if (!tr.terminal) {
                    if (tr.next_action_tokens.empty()) {
                        throw ShapeError("td_loss_and_grads: non-terminal transition without next actions");
                    }
                    std::vector<S> h_s2 = encode_state(target_params, std::span<const std::int32_t>(tr.next_state_tokens));
                    std::vector<std::vector<S>> h_as;
                    h_as.reserve(tr.next_action_tokens.size());
                    for (const auto& a : tr.next_action_tokens) h_as.push_back(cache.at(a));
                    auto q2 = q_values(target_params, std::span<const S>(h_s2), h_as);
                    S best = q2[0];
                    for (S v : q2) best = std::max(best, v);
                    y += gamma * static_cast<double>(best);
                }
                encode_state(params, std::span<const std::int32_t>(tr.state_tokens), h_s, &scache);
                encode_action(params, std::span<const std::int32_t>(tr.action_tokens), h_a, &acache);
                auto q = q_values(params, std::span<const S>(h_s), {h_a});
                const double qv = static_cast<double>(q[0]);
                if (!std::isfinite(qv) || !std::isfinite(y)) {
                    throw DivergenceError("non-finite forward value: Q=" + std::to_string(qv) +
                                          " target=" + std::to_string(y));
                }
                const double err = qv - y;
                losses[i] = err * err;
                const S dq = static_cast<S>(2.0 * err / static_cast<double>(B));
                backward_bilinear(params, std::span<const S>(h_s), std::span<const S>(h_a), dq, g, dh_s, dh_a);
                backward_state(params, scache, std::span<const S>(dh_s), g);
                backward_action(params, acache, std::span<const S>(dh_a), g);
            }
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(tid)] = e.what();
        }
    });
    for (const auto& e : errors) {
        if (!e.empty()) throw DivergenceError(e);
    }

    grads = ws.per_thread[0];
    for (int t = 1; t < workers; ++t) grads.accumulate(ws.per_thread[static_cast<std::size_t>(t)]);
    double loss = 0.0;
    for (double l : losses) loss += l;
    loss /= static_cast<double>(B);
    if (!std::isfinite(loss)) throw DivergenceError("non-finite TD loss");
    return loss;
}

// ---------------------------------------------------------------------------
// Adam

template <typename S>
struct AdamState {
    QNetworkParams<S> m;
    QNetworkParams<S> v;
    std::int64_t t = 0;

    static AdamState zeros(const NetConfig& cfg) {
        AdamState a;
        a.m = QNetworkParams<S>::zeros(cfg);
        a.v = QNetworkParams<S>::zeros(cfg);
        return a;
    }
};

template <typename S>
void adam_step(QNetworkParams<S>& params, const QNetworkParams<S>& grads, AdamState<S>& adam, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    adam.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
    params.for_each_tensor([&](const std::string& name, Tensor<S>& p) {
        const Tensor<S>* g = nullptr;
        Tensor<S>* m = nullptr;
        Tensor<S>* v = nullptr;
        const_cast<QNetworkParams<S>&>(grads).for_each_tensor([&](const std::string& n, Tensor<S>& t) {
            if (n == name) g = &t;
        });
        adam.m.for_each_tensor([&](const std::string& n, Tensor<S>& t) {
            if (n == name) m = &t;
        });
        adam.v.for_each_tensor([&](const std::string& n, Tensor<S>& t) {
            if (n == name) v = &t;
        });
        p.check_same_shape(*g, ("adam_step " + name).c_str());
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double gi = static_cast<double>(g->data[i]);
            const double mi = beta1 * static_cast<double>(m->data[i]) + (1.0 - beta1) * gi;
            const double vi = beta2 * static_cast<double>(v->data[i]) + (1.0 - beta2) * gi * gi;
            m->data[i] = static_cast<S>(mi);
            v->data[i] = static_cast<S>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p.data[i] -= static_cast<S>(lr * mhat / (std::sqrt(vhat) + eps));
        }
    });
}

// ---------------------------------------------------------------------------
// checkpoints: versioned binary with named tensors; the vocabulary is stored
// in a sibling text file (see textenc::Vocab). Layout is documented in
// docs/checkpoint_format.md.

struct CheckpointMeta {
    std::string stage;
    std::uint64_t train_step = 0;
    std::uint64_t vocab_hash = 0;
};

namespace detail {

inline void write_bytes(std::ofstream& f, const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ofstream& f, T v) {
    write_bytes(f, &v, sizeof(T));
}

inline void write_string(std::ofstream& f, const std::string& s) {
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(s.size()));
    write_bytes(f, s.data(), s.size());
}

inline void read_bytes(std::ifstream& f, void* p, std::size_t n) {
    if (!f.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) {
        throw DataError("checkpoint file truncated");
    }
}

template <typename T>
T read_pod(std::ifstream& f) {
    T v;
    read_bytes(f, &v, sizeof(T));
    return v;
}

inline std::string read_string(std::ifstream& f) {
    auto n = read_pod<std::uint32_t>(f);
    if (n > (1u << 20)) throw DataError("checkpoint string field too long");
    std::string s(n, '\0');
    read_bytes(f, s.data(), n);
    return s;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[4] = {'C', 'B', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename S>
void save_checkpoint(const std::string& path, const QNetworkParams<S>& params, const AdamState<S>& adam,
                     const CheckpointMeta& meta) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write checkpoint: " + path);
    detail::write_bytes(f, kCheckpointMagic, 4);
    detail::write_pod<std::uint32_t>(f, kCheckpointVersion);
    detail::write_pod<std::uint8_t>(f, static_cast<std::uint8_t>(sizeof(S)));
    detail::write_string(f, meta.stage);
    detail::write_pod<std::uint64_t>(f, meta.train_step);
    detail::write_pod<std::uint64_t>(f, meta.vocab_hash);

    const NetConfig& cfg = params.cfg;
    detail::write_pod<std::int32_t>(f, cfg.vocab_size);
    detail::write_pod<std::int32_t>(f, cfg.embed_dim);
    detail::write_pod<std::int32_t>(f, cfg.max_positions);
    detail::write_pod<std::int32_t>(f, static_cast<std::int32_t>(cfg.conv_widths.size()));
    for (auto w : cfg.conv_widths) detail::write_pod<std::int32_t>(f, w);
    detail::write_pod<std::int32_t>(f, cfg.filters_per_width);
    detail::write_pod<std::int32_t>(f, cfg.recurrent_units);
    detail::write_pod<std::int64_t>(f, adam.t);

    std::vector<std::pair<std::string, const Tensor<S>*>> tensors;
    params.for_each_tensor([&](const std::string& n, const Tensor<S>& t) { tensors.emplace_back(n, &t); });
    adam.m.for_each_tensor([&](const std::string& n, const Tensor<S>& t) { tensors.emplace_back("adam.m." + n, &t); });
    adam.v.for_each_tensor([&](const std::string& n, const Tensor<S>& t) { tensors.emplace_back("adam.v." + n, &t); });

    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        detail::write_string(f, name);
        detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(t->shape.size()));
        for (auto d : t->shape) detail::write_pod<std::int64_t>(f, d);
        detail::write_bytes(f, t->data.data(), t->data.size() * sizeof(S));
    }
    if (!f) throw DataError("error while writing checkpoint: " + path);
}

template <typename S>
struct Checkpoint {
    QNetworkParams<S> params;
    AdamState<S> adam;
    CheckpointMeta meta;
};

template <typename S>
Checkpoint<S> load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read checkpoint: " + path);
    char magic[4];
    detail::read_bytes(f, magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw DataError("not a checkpoint file: " + path);
    auto version = detail::read_pod<std::uint32_t>(f);
    if (version != kCheckpointVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    auto dtype = detail::read_pod<std::uint8_t>(f);
    if (dtype != sizeof(S)) {
        throw DataError("checkpoint scalar width " + std::to_string(dtype) + " does not match build width " +
                        std::to_string(sizeof(S)));
    }
    Checkpoint<S> out;
    out.meta.stage = detail::read_string(f);
    out.meta.train_step = detail::read_pod<std::uint64_t>(f);
    out.meta.vocab_hash = detail::read_pod<std::uint64_t>(f);

    NetConfig cfg;
    cfg.vocab_size = detail::read_pod<std::int32_t>(f);
    cfg.embed_dim = detail::read_pod<std::int32_t>(f);
    cfg.max_positions = detail::read_pod<std::int32_t>(f);
    auto n_widths = detail::read_pod<std::int32_t>(f);
    cfg.conv_widths.clear();
    for (std::int32_t i = 0; i < n_widths; ++i) cfg.conv_widths.push_back(detail::read_pod<std::int32_t>(f));
    cfg.filters_per_width = detail::read_pod<std::int32_t>(f);
    cfg.recurrent_units = detail::read_pod<std::int32_t>(f);
    out.params = QNetworkParams<S>::zeros(cfg);
    out.adam = AdamState<S>::zeros(cfg);
    out.adam.t = detail::read_pod<std::int64_t>(f);

    auto count = detail::read_pod<std::uint32_t>(f);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = detail::read_string(f);
        auto ndim = detail::read_pod<std::uint32_t>(f);
        std::vector<std::int64_t> shape;
        std::int64_t n = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            shape.push_back(detail::read_pod<std::int64_t>(f));
            n *= shape.back();
        }
        Tensor<S>* dst = nullptr;
        auto find_in = [&](QNetworkParams<S>& ps, const std::string& want) {
            ps.for_each_tensor([&](const std::string& n2, Tensor<S>& t) {
                if (n2 == want) dst = &t;
            });
        };
        if (name.rfind("adam.m.", 0) == 0) {
            find_in(out.adam.m, name.substr(7));
        } else if (name.rfind("adam.v.", 0) == 0) {
            find_in(out.adam.v, name.substr(7));
        } else {
            find_in(out.params, name);
        }
        if (!dst) throw DataError("checkpoint contains unknown tensor: " + name);
        if (dst->shape != shape) throw DataError("checkpoint tensor shape mismatch: " + name);
        detail::read_bytes(f, dst->data.data(), dst->data.size() * sizeof(S));
    }
    return out;
}

}  // namespace cookbench::neural
