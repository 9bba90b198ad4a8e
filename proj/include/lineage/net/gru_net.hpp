#pragma once

// Recurrent actor-critic: a feed-forward or 1x1-conv encoder, a GRU memory
// cell, and separate policy/value MLP heads, with exact reverse-mode
// gradients through a rollout segment (BPTT truncated at segment
// boundaries via stored initial hidden states, and cut wherever an episode
// terminated mid-segment).
//
// All math is batched over columns: an input is [width x lanes].

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lineage/env/common.hpp"
#include "lineage/errors.hpp"
#include "lineage/net/param_set.hpp"
#include "lineage/rng.hpp"

namespace lineage {

enum class Activation { LeakyRelu, Tanh };

namespace act {

constexpr double kLeakySlope = 0.01;

inline void apply(Activation a, Mat& x) {
    if (a == Activation::LeakyRelu)
        x = (x.array().max(0.0) + kLeakySlope * x.array().min(0.0)).matrix();
    else
        x = x.array().tanh().matrix();
}

// Multiplies `d` in place by the activation derivative, expressed through
// the post-activation value.
inline void mul_deriv(Activation a, const Mat& post, Mat& d) {
    if (a == Activation::LeakyRelu)
        d.array() *= (post.array() > 0.0).cast<double>() * (1.0 - kLeakySlope) + kLeakySlope;
    else
        d.array() *= 1.0 - post.array().square();
}

inline void sigmoid(Mat& x) { x = (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

}  // namespace act

struct NetConfig {
    bool conv_encoder = false;
    int flat_input = 0;  // full obs width, or the extras width on the conv path
    int grid_cells = 9;
    int grid_channels = 5;
    std::array<int, 3> conv_channels{32, 64, 64};
    std::vector<int> encoder_fc{128, 256, 256};  // last entry == memory width
    int memory_width = 256;
    std::array<int, 2> head_hidden{128, 128};
    int action_count = 0;
    Activation encoder_activation = Activation::LeakyRelu;  // convs are always leaky-relu
    Activation head_activation = Activation::LeakyRelu;

    int obs_width() const {
        return conv_encoder ? grid_cells * grid_channels + flat_input : flat_input;
    }

    int flatten_width() const { return grid_cells * conv_channels[2]; }

    // Reference widths follow the published architecture; width_scale < 1
    // shrinks every hidden dimension proportionally for CPU-budget presets.
    static NetConfig for_env(const EnvConfig& env, const ObsLayout& layout, double width_scale = 1.0) {
        const auto s = [&](int w) {
            const int v = static_cast<int>(std::lround(w * width_scale));
            return std::max(4, (v + 3) / 4 * 4);
        };
        NetConfig cfg;
        cfg.action_count = env.action_count();
        if (env.kind == EnvKind::GoalSeq) {
            cfg.conv_encoder = true;
            cfg.grid_cells = 9;
            cfg.grid_channels = 5;
            cfg.conv_channels = {s(32), s(64), s(64)};
            cfg.flat_input = layout.total() - 45;
            cfg.encoder_fc = {s(256)};
            cfg.head_hidden = {s(64), s(64)};
            cfg.encoder_activation = Activation::Tanh;
            cfg.head_activation = Activation::Tanh;
        } else {
            cfg.conv_encoder = false;
            cfg.flat_input = layout.total();
            cfg.encoder_fc = {s(128), s(256), s(256)};
            cfg.head_hidden = {s(128), s(128)};
            cfg.encoder_activation = Activation::LeakyRelu;
            cfg.head_activation = Activation::LeakyRelu;
        }
        cfg.memory_width = cfg.encoder_fc.back();
        return cfg;
    }
};

// Builds the zero ParamSet for a config; entry order fixes both the
// checkpoint layout and the init draw order.
inline ParamSet param_template(const NetConfig& cfg) {
    ParamSet p;
    int enc_in;
    if (cfg.conv_encoder) {
        p.add("conv0.w", cfg.conv_channels[0], cfg.grid_channels);
        p.add("conv0.b", cfg.conv_channels[0], 1);
        p.add("conv1.w", cfg.conv_channels[1], cfg.conv_channels[0]);
        p.add("conv1.b", cfg.conv_channels[1], 1);
        p.add("conv2.w", cfg.conv_channels[2], cfg.conv_channels[1]);
        p.add("conv2.b", cfg.conv_channels[2], 1);
        enc_in = cfg.flatten_width() + cfg.flat_input;
    } else {
        enc_in = cfg.flat_input;
    }
    for (std::size_t i = 0; i < cfg.encoder_fc.size(); ++i) {
        const std::string tag = "enc" + std::to_string(i);
        p.add(tag + ".w", cfg.encoder_fc[i], enc_in);
        p.add(tag + ".b", cfg.encoder_fc[i], 1);
        enc_in = cfg.encoder_fc[i];
    }
    const int h = cfg.memory_width;
    p.add("gru.wi", 3 * h, cfg.encoder_fc.back());
    p.add("gru.wh", 3 * h, h);
    p.add("gru.bi", 3 * h, 1);
    p.add("gru.bh", 3 * h, 1);
    p.add("policy0.w", cfg.head_hidden[0], h);
    p.add("policy0.b", cfg.head_hidden[0], 1);
    p.add("policy1.w", cfg.head_hidden[1], cfg.head_hidden[0]);
    p.add("policy1.b", cfg.head_hidden[1], 1);
    p.add("policy2.w", cfg.action_count, cfg.head_hidden[1]);
    p.add("policy2.b", cfg.action_count, 1);
    p.add("value0.w", cfg.head_hidden[0], h);
    p.add("value0.b", cfg.head_hidden[0], 1);
    p.add("value1.w", cfg.head_hidden[1], cfg.head_hidden[0]);
    p.add("value1.b", cfg.head_hidden[1], 1);
    p.add("value2.w", 1, cfg.head_hidden[1]);
    p.add("value2.b", 1, 1);
    return p;
}

// Orthogonal init with sign-fixed QR; wide matrices get orthonormal rows.
inline Mat orthogonal_init(Eigen::Index rows, Eigen::Index cols, double gain, RngStream& rng) {
    const bool tall = rows >= cols;
    const Eigen::Index r = tall ? rows : cols;
    const Eigen::Index c = tall ? cols : rows;
    Mat gauss(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) gauss(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(gauss);
    Mat q = qr.householderQ() * Mat::Identity(r, c);
    const Mat rmat = qr.matrixQR().topLeftCorner(c, c);
    for (Eigen::Index j = 0; j < c; ++j)
        if (rmat(j, j) < 0.0) q.col(j) *= -1.0;
    if (!tall) q = q.transpose().eval();
    return gain * q;
}

namespace detail {

inline void init_entry(ParamSet& p, const std::string& name, double gain, RngStream& rng) {
    Mat& w = p[p.index_of(name)];
    w = orthogonal_init(w.rows(), w.cols(), gain, rng);
}

// GRU weights initialise gate-block-wise so each of r/z/n starts orthogonal.
inline void init_gru_entry(ParamSet& p, const std::string& name, double gain, RngStream& rng) {
    Mat& w = p[p.index_of(name)];
    const Eigen::Index h = w.rows() / 3;
    for (int g = 0; g < 3; ++g)
        w.middleRows(g * h, h) = orthogonal_init(h, w.cols(), gain, rng);
}

}  // namespace detail

// Hidden layers at gain sqrt(2), the policy output at 0.01, the value
// output at 1.0, all biases zero.
inline ParamSet init_params(const NetConfig& cfg, RngStream& rng) {
    ParamSet p = param_template(cfg);
    const double g = std::sqrt(2.0);
    if (cfg.conv_encoder)
        for (int i = 0; i < 3; ++i) detail::init_entry(p, "conv" + std::to_string(i) + ".w", g, rng);
    for (std::size_t i = 0; i < cfg.encoder_fc.size(); ++i)
        detail::init_entry(p, "enc" + std::to_string(i) + ".w", g, rng);
    detail::init_gru_entry(p, "gru.wi", g, rng);
    detail::init_gru_entry(p, "gru.wh", g, rng);
    detail::init_entry(p, "policy0.w", g, rng);
    detail::init_entry(p, "policy1.w", g, rng);
    detail::init_entry(p, "policy2.w", 0.01, rng);
    detail::init_entry(p, "value0.w", g, rng);
    detail::init_entry(p, "value1.w", g, rng);
    detail::init_entry(p, "value2.w", 1.0, rng);
    return p;
}

// Re-initialises the last two feed-forward layers of both heads and zeroes
// their biases; encoder, memory cell and the first head layer are untouched.
inline void reset_final_layers(const NetConfig& cfg, ParamSet& p, RngStream& rng) {
    const double g = std::sqrt(2.0);
    detail::init_entry(p, "policy1.w", g, rng);
    detail::init_entry(p, "policy2.w", 0.01, rng);
    detail::init_entry(p, "value1.w", g, rng);
    detail::init_entry(p, "value2.w", 1.0, rng);
    for (const char* name : {"policy1.b", "policy2.b", "value1.b", "value2.b"})
        p[p.index_of(name)].setZero();
}

// Per-step activation cache; doubles as the rollout scratch so the fast
// path and the BPTT path share one forward implementation.
struct StepCache {
    Mat x;  // input copy
    Mat conv_in, c0, c1, c2, fc0_in;
    std::vector<Mat> enc_post;
    Mat h_in, gi, gh, r, z, n, h_out;
    Mat pol0, pol1, val0, val1;
    Mat logits, value;

    void ensure(const NetConfig& cfg, int lanes) {
        const auto fit = [&](Mat& m, int rows, int cols) {
            if (m.rows() != rows || m.cols() != cols) m.resize(rows, cols);
        };
        fit(x, cfg.obs_width(), lanes);
        if (cfg.conv_encoder) {
            fit(conv_in, cfg.grid_channels, cfg.grid_cells * lanes);
            fit(c0, cfg.conv_channels[0], cfg.grid_cells * lanes);
            fit(c1, cfg.conv_channels[1], cfg.grid_cells * lanes);
            fit(c2, cfg.conv_channels[2], cfg.grid_cells * lanes);
            fit(fc0_in, cfg.flatten_width() + cfg.flat_input, lanes);
        }
        enc_post.resize(cfg.encoder_fc.size());
        for (std::size_t i = 0; i < cfg.encoder_fc.size(); ++i) fit(enc_post[i], cfg.encoder_fc[i], lanes);
        const int h = cfg.memory_width;
        fit(h_in, h, lanes);
        fit(gi, 3 * h, lanes);
        fit(gh, 3 * h, lanes);
        fit(r, h, lanes);
        fit(z, h, lanes);
        fit(n, h, lanes);
        fit(h_out, h, lanes);
        fit(pol0, cfg.head_hidden[0], lanes);
        fit(pol1, cfg.head_hidden[1], lanes);
        fit(val0, cfg.head_hidden[0], lanes);
        fit(val1, cfg.head_hidden[1], lanes);
        fit(logits, cfg.action_count, lanes);
        fit(value, 1, lanes);
    }
};

// Reused temporaries for backward_sequence.
struct BackwardScratch {
    Mat carry, dh_out, dh1, dh0;
    Mat dz, dn, da_n, dgi, dgh;
    std::vector<Mat> enc_d;
    Mat dflat, dconv, dconv2;

    void ensure(const NetConfig& cfg, int lanes) {
        const auto fit = [&](Mat& m, int rows, int cols) {
            if (m.rows() != rows || m.cols() != cols) m.resize(rows, cols);
        };
        const int h = cfg.memory_width;
        fit(carry, h, lanes);
        fit(dh_out, h, lanes);
        fit(dh1, cfg.head_hidden[1], lanes);
        fit(dh0, cfg.head_hidden[0], lanes);
        fit(dz, h, lanes);
        fit(dn, h, lanes);
        fit(da_n, h, lanes);
        fit(dgi, 3 * h, lanes);
        fit(dgh, 3 * h, lanes);
        enc_d.resize(cfg.encoder_fc.size());
        for (std::size_t i = 0; i < cfg.encoder_fc.size(); ++i) fit(enc_d[i], cfg.encoder_fc[i], lanes);
        if (cfg.conv_encoder) {
            fit(dflat, cfg.flatten_width() + cfg.flat_input, lanes);
            fit(dconv, cfg.conv_channels[2], cfg.grid_cells * lanes);
            fit(dconv2, std::max(cfg.conv_channels[0], cfg.conv_channels[1]), cfg.grid_cells * lanes);
        }
    }
};

class GruNet {
public:
    GruNet(NetConfig cfg, ParamSet params) : cfg_(std::move(cfg)), params_(std::move(params)) {
        const ParamSet expect = param_template(cfg_);
        if (!params_.same_shape(expect))
            throw ConfigError("checkpoint/parameter shapes do not match the network config");
        resolve_indices();
    }

    static GruNet fresh(const NetConfig& cfg, RngStream& rng) { return GruNet(cfg, init_params(cfg, rng)); }

    const NetConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    int hidden_width() const { return cfg_.memory_width; }
    int obs_width() const { return cfg_.obs_width(); }

    Mat zero_hidden(int lanes) const { return Mat::Zero(cfg_.memory_width, lanes); }

    // One batched step. Fills every field of `cache`, including
    // cache.logits / cache.value / cache.h_out.
    void forward(const Eigen::Ref<const Mat>& obs, const Eigen::Ref<const Mat>& h_in,
                 StepCache& cache) const {
        const int lanes = static_cast<int>(obs.cols());
        cache.ensure(cfg_, lanes);
        cache.x = obs;
        cache.h_in = h_in;

        const Mat* enc_in = &cache.x;
        if (cfg_.conv_encoder) {
            // 1x1 convolutions are per-cell dense layers over the channel
            // axis; reshape [45 x B] -> [5 x 9B] with cells as columns.
            for (int b = 0; b < lanes; ++b)
                for (int cell = 0; cell < cfg_.grid_cells; ++cell)
                    cache.conv_in.col(b * cfg_.grid_cells + cell) =
                        cache.x.col(b).segment(cell * cfg_.grid_channels, cfg_.grid_channels);
            cache.c0.noalias() = params_[conv_w_[0]] * cache.conv_in;
            cache.c0.colwise() += params_[conv_b_[0]].col(0);
            act::apply(Activation::LeakyRelu, cache.c0);
            cache.c1.noalias() = params_[conv_w_[1]] * cache.c0;
            cache.c1.colwise() += params_[conv_b_[1]].col(0);
            act::apply(Activation::LeakyRelu, cache.c1);
            cache.c2.noalias() = params_[conv_w_[2]] * cache.c1;
            cache.c2.colwise() += params_[conv_b_[2]].col(0);
            act::apply(Activation::LeakyRelu, cache.c2);
            const int ch = cfg_.conv_channels[2];
            for (int b = 0; b < lanes; ++b) {
                for (int cell = 0; cell < cfg_.grid_cells; ++cell)
                    cache.fc0_in.col(b).segment(cell * ch, ch) = cache.c2.col(b * cfg_.grid_cells + cell);
                cache.fc0_in.col(b).tail(cfg_.flat_input) = cache.x.col(b).tail(cfg_.flat_input);
            }
            enc_in = &cache.fc0_in;
        }
        for (std::size_t i = 0; i < cfg_.encoder_fc.size(); ++i) {
            cache.enc_post[i].noalias() = params_[enc_w_[i]] * (*enc_in);
            cache.enc_post[i].colwise() += params_[enc_b_[i]].col(0);
            act::apply(cfg_.encoder_activation, cache.enc_post[i]);
            enc_in = &cache.enc_post[i];
        }

        const int h = cfg_.memory_width;
        cache.gi.noalias() = params_[gru_wi_] * (*enc_in);
        cache.gi.colwise() += params_[gru_bi_].col(0);
        cache.gh.noalias() = params_[gru_wh_] * cache.h_in;
        cache.gh.colwise() += params_[gru_bh_].col(0);
        cache.r = cache.gi.topRows(h) + cache.gh.topRows(h);
        act::sigmoid(cache.r);
        cache.z = cache.gi.middleRows(h, h) + cache.gh.middleRows(h, h);
        act::sigmoid(cache.z);
        cache.n = (cache.gi.bottomRows(h).array() + cache.r.array() * cache.gh.bottomRows(h).array())
                      .tanh()
                      .matrix();
        cache.h_out = ((1.0 - cache.z.array()) * cache.n.array() + cache.z.array() * cache.h_in.array())
                          .matrix();

        cache.pol0.noalias() = params_[pol_w_[0]] * cache.h_out;
        cache.pol0.colwise() += params_[pol_b_[0]].col(0);
        act::apply(cfg_.head_activation, cache.pol0);
        cache.pol1.noalias() = params_[pol_w_[1]] * cache.pol0;
        cache.pol1.colwise() += params_[pol_b_[1]].col(0);
        act::apply(cfg_.head_activation, cache.pol1);
        cache.logits.noalias() = params_[pol_w_[2]] * cache.pol1;
        cache.logits.colwise() += params_[pol_b_[2]].col(0);

        cache.val0.noalias() = params_[val_w_[0]] * cache.h_out;
        cache.val0.colwise() += params_[val_b_[0]].col(0);
        act::apply(cfg_.head_activation, cache.val0);
        cache.val1.noalias() = params_[val_w_[1]] * cache.val0;
        cache.val1.colwise() += params_[val_b_[1]].col(0);
        act::apply(cfg_.head_activation, cache.val1);
        cache.value.noalias() = params_[val_w_[2]] * cache.val1;
        cache.value.colwise() += params_[val_b_[2]].col(0);

        if (!cache.logits.allFinite() || !cache.value.allFinite())
            throw NumericalError("non-finite network output");
    }

    // Exact BPTT over `t_count` cached forward steps. done[t][lane] marks an
    // episode termination at step t: no hidden-state gradient flows across
    // it, mirroring the hidden reset in the forward pass. Gradients
    // accumulate into `grads` (same template as the params).
    void backward_sequence(std::vector<StepCache>& steps, int t_count,
                           const std::vector<std::vector<std::uint8_t>>& done,
                           const std::vector<Mat>& dlogits, const std::vector<Mat>& dvalue,
                           ParamSet& grads, BackwardScratch& ws) const {
        if (t_count == 0) return;
        const int h = cfg_.memory_width;
        const int lanes = static_cast<int>(steps[0].x.cols());
        ws.ensure(cfg_, lanes);
        ws.carry.setZero();
        for (int t = t_count - 1; t >= 0; --t) {
            StepCache& c = steps[static_cast<std::size_t>(t)];
            const std::size_t ts = static_cast<std::size_t>(t);

            // Value head.
            grads[val_w_[2]].noalias() += dvalue[ts] * c.val1.transpose();
            grads[val_b_[2]].col(0) += dvalue[ts].rowwise().sum();
            ws.dh1.noalias() = params_[val_w_[2]].transpose() * dvalue[ts];
            act::mul_deriv(cfg_.head_activation, c.val1, ws.dh1);
            grads[val_w_[1]].noalias() += ws.dh1 * c.val0.transpose();
            grads[val_b_[1]].col(0) += ws.dh1.rowwise().sum();
            ws.dh0.noalias() = params_[val_w_[1]].transpose() * ws.dh1;
            act::mul_deriv(cfg_.head_activation, c.val0, ws.dh0);
            grads[val_w_[0]].noalias() += ws.dh0 * c.h_out.transpose();
            grads[val_b_[0]].col(0) += ws.dh0.rowwise().sum();
            ws.dh_out.noalias() = params_[val_w_[0]].transpose() * ws.dh0;

            // Policy head.
            grads[pol_w_[2]].noalias() += dlogits[ts] * c.pol1.transpose();
            grads[pol_b_[2]].col(0) += dlogits[ts].rowwise().sum();
            ws.dh1.noalias() = params_[pol_w_[2]].transpose() * dlogits[ts];
            act::mul_deriv(cfg_.head_activation, c.pol1, ws.dh1);
            grads[pol_w_[1]].noalias() += ws.dh1 * c.pol0.transpose();
            grads[pol_b_[1]].col(0) += ws.dh1.rowwise().sum();
            ws.dh0.noalias() = params_[pol_w_[1]].transpose() * ws.dh1;
            act::mul_deriv(cfg_.head_activation, c.pol0, ws.dh0);
            grads[pol_w_[0]].noalias() += ws.dh0 * c.h_out.transpose();
            grads[pol_b_[0]].col(0) += ws.dh0.rowwise().sum();
            ws.dh_out.noalias() += params_[pol_w_[0]].transpose() * ws.dh0;

            // Recurrent gradient from step t+1, cut at episode ends.
            if (t + 1 < t_count) {
                for (int b = 0; b < lanes; ++b)
                    if (!done[ts][static_cast<std::size_t>(b)]) ws.dh_out.col(b) += ws.carry.col(b);
            }

            // GRU cell. h' = (1-z)*n + z*h_in; n = tanh(gi_n + r*gh_n).
            ws.dz = (ws.dh_out.array() * (c.h_in.array() - c.n.array())).matrix();
            ws.dn = (ws.dh_out.array() * (1.0 - c.z.array())).matrix();
            ws.da_n = (ws.dn.array() * (1.0 - c.n.array().square())).matrix();
            // r gate rows: dr = da_n * gh_n, then through the sigmoid.
            ws.dgi.topRows(h) =
                (ws.da_n.array() * c.gh.bottomRows(h).array() * c.r.array() * (1.0 - c.r.array()))
                    .matrix();
            ws.dgh.topRows(h) = ws.dgi.topRows(h);
            // z gate rows.
            ws.dgi.middleRows(h, h) = (ws.dz.array() * c.z.array() * (1.0 - c.z.array())).matrix();
            ws.dgh.middleRows(h, h) = ws.dgi.middleRows(h, h);
            // candidate rows.
            ws.dgi.bottomRows(h) = ws.da_n;
            ws.dgh.bottomRows(h) = (ws.da_n.array() * c.r.array()).matrix();

            const Mat& enc_out = c.enc_post.back();
            grads[gru_wi_].noalias() += ws.dgi * enc_out.transpose();
            grads[gru_bi_].col(0) += ws.dgi.rowwise().sum();
            grads[gru_wh_].noalias() += ws.dgh * c.h_in.transpose();
            grads[gru_bh_].col(0) += ws.dgh.rowwise().sum();

            // dh_in: direct path plus the gate path.
            ws.carry = (ws.dh_out.array() * c.z.array()).matrix();
            ws.carry.noalias() += params_[gru_wh_].transpose() * ws.dgh;

            // Encoder.
            ws.enc_d.back().noalias() = params_[gru_wi_].transpose() * ws.dgi;
            for (int i = static_cast<int>(cfg_.encoder_fc.size()) - 1; i >= 0; --i) {
                const std::size_t is = static_cast<std::size_t>(i);
                Mat& d = ws.enc_d[is];
                act::mul_deriv(cfg_.encoder_activation, c.enc_post[is], d);
                const Mat& in = (i > 0) ? c.enc_post[is - 1] : (cfg_.conv_encoder ? c.fc0_in : c.x);
                grads[enc_w_[is]].noalias() += d * in.transpose();
                grads[enc_b_[is]].col(0) += d.rowwise().sum();
                if (i > 0)
                    ws.enc_d[is - 1].noalias() = params_[enc_w_[is]].transpose() * d;
                else if (cfg_.conv_encoder)
                    ws.dflat.noalias() = params_[enc_w_[0]].transpose() * d;
            }

            if (cfg_.conv_encoder) {
                const int ch = cfg_.conv_channels[2];
                for (int b = 0; b < lanes; ++b)
                    for (int cell = 0; cell < cfg_.grid_cells; ++cell)
                        ws.dconv.col(b * cfg_.grid_cells + cell) = ws.dflat.col(b).segment(cell * ch, ch);
                act::mul_deriv(Activation::LeakyRelu, c.c2, ws.dconv);
                grads[conv_w_[2]].noalias() += ws.dconv * c.c1.transpose();
                grads[conv_b_[2]].col(0) += ws.dconv.rowwise().sum();
                Mat& d1 = ws.dconv2;
                d1.resize(cfg_.conv_channels[1], cfg_.grid_cells * lanes);
                d1.noalias() = params_[conv_w_[2]].transpose() * ws.dconv;
                act::mul_deriv(Activation::LeakyRelu, c.c1, d1);
                grads[conv_w_[1]].noalias() += d1 * c.c0.transpose();
                grads[conv_b_[1]].col(0) += d1.rowwise().sum();
                Mat d0(cfg_.conv_channels[0], cfg_.grid_cells * lanes);
                d0.noalias() = params_[conv_w_[1]].transpose() * d1;
                act::mul_deriv(Activation::LeakyRelu, c.c0, d0);
                grads[conv_w_[0]].noalias() += d0 * c.conv_in.transpose();
                grads[conv_b_[0]].col(0) += d0.rowwise().sum();
            }
        }
    }

private:
    void resolve_indices() {
        if (cfg_.conv_encoder)
            for (int i = 0; i < 3; ++i) {
                conv_w_[static_cast<std::size_t>(i)] = params_.index_of("conv" + std::to_string(i) + ".w");
                conv_b_[static_cast<std::size_t>(i)] = params_.index_of("conv" + std::to_string(i) + ".b");
            }
        enc_w_.resize(cfg_.encoder_fc.size());
        enc_b_.resize(cfg_.encoder_fc.size());
        for (std::size_t i = 0; i < cfg_.encoder_fc.size(); ++i) {
            enc_w_[i] = params_.index_of("enc" + std::to_string(i) + ".w");
            enc_b_[i] = params_.index_of("enc" + std::to_string(i) + ".b");
        }
        gru_wi_ = params_.index_of("gru.wi");
        gru_wh_ = params_.index_of("gru.wh");
        gru_bi_ = params_.index_of("gru.bi");
        gru_bh_ = params_.index_of("gru.bh");
        for (int i = 0; i < 3; ++i) {
            pol_w_[static_cast<std::size_t>(i)] = params_.index_of("policy" + std::to_string(i) + ".w");
            pol_b_[static_cast<std::size_t>(i)] = params_.index_of("policy" + std::to_string(i) + ".b");
            val_w_[static_cast<std::size_t>(i)] = params_.index_of("value" + std::to_string(i) + ".w");
            val_b_[static_cast<std::size_t>(i)] = params_.index_of("value" + std::to_string(i) + ".b");
        }
    }

    NetConfig cfg_;
    ParamSet params_;
    std::array<int, 3> conv_w_{}, conv_b_{};
    std::vector<int> enc_w_, enc_b_;
    int gru_wi_ = 0, gru_wh_ = 0, gru_bi_ = 0, gru_bh_ = 0;
    std::array<int, 3> pol_w_{}, pol_b_{}, val_w_{}, val_b_{};
};

}  // namespace lineage
