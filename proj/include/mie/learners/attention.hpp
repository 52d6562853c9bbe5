// Copyright 2026 The mie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/*
 * Attention network m -> rho^C_m with hand-written reverse mode.
 *
 * Input row for site position p of m: [tok(m_p) | pos(p + 1) | msk(flag)],
 * concatenated; the CLS row is [tok(CLS) | pos(0) | msk(0)]. Token ids:
 * 0, 1 outcomes, 2 MASK, 3 CLS. Encoder layers are pre-LN:
 *
 *   x <- x + Wo Attn(LN1 x)        x <- x + W2 gelu(W1 LN2 x)
 *
 * followed by a final LN on the CLS row and a linear head to 32 reals,
 * read as h = re[16] + i im[16] (row-major 4x4). rho = h^dagger h / Tr.
 *
 * Masked sites are never keys, so they cannot influence any other row.
 * They are therefore left out of the sequence entirely, which is exactly
 * equivalent and saves their cost.
 *
 * All rows of a minibatch share one access mask, so a batch is a dense
 * (batch * T) x width matrix and every linear map is one GEMM.
 */

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mie/learners/model.hpp"

namespace mie::learn {

struct AttentionConfig {
    GeometryConfig geometry = GeometryConfig::chain(10);
    int layers = 2;
    int heads = 4;
    int tok_width = 32;
    int pos_width = 24;
    int msk_width = 8;
    int ff_width = 128;
    // Scale of the output head weights. The target depends on full parities
    // of m, so the loss is flat around a near-constant output; a head of
    // order one leaves that plateau within a few epochs, 0.1 often does not.
    double head_init = 1.0;
    // The first position coordinate starts at +-sublattice_init by the
    // bipartite sublattice of the site (chain index parity, grid
    // checkerboard); 0 leaves it Gaussian. The chain target needs the two
    // sublattice parities separately, and without this signal training
    // often stops at the total parity.
    double sublattice_init = 3.0;
    std::uint64_t seed = 0;

    int width() const { return tok_width + pos_width + msk_width; }

    void validate() const {
        geometry.validate();
        require(layers >= 1 && heads >= 1 && ff_width >= 1, "layer, head and feedforward counts must be positive");
        require(tok_width >= 1 && pos_width >= 1 && msk_width >= 1, "embedding sub-widths must be positive");
        require(width() % heads == 0, "embedding width must be divisible by the number of heads");
        require(head_init >= 0.0, "head_init must be >= 0");
        require(sublattice_init >= 0.0, "sublattice_init must be >= 0");
    }
};

class AttentionModel final : public LearnedModel {
  public:
    using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using RVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
    using Map = Eigen::Map<RMat>;
    using CMap = Eigen::Map<const RMat>;
    using VMap = Eigen::Map<RVec>;
    using CVMap = Eigen::Map<const RVec>;

    static constexpr int kTokMask = 2;
    static constexpr int kTokCls = 3;
    static constexpr int kOut = 32;

    explicit AttentionModel(AttentionConfig config) : config_(std::move(config)) {
        config_.validate();
        const auto D = static_cast<std::size_t>(config_.width());
        const auto F = static_cast<std::size_t>(config_.ff_width);
        const auto P = static_cast<std::size_t>(config_.geometry.num_measured() + 1);
        tok_ = params_.add("tok", {4, static_cast<std::size_t>(config_.tok_width)});
        pos_ = params_.add("pos", {P, static_cast<std::size_t>(config_.pos_width)});
        msk_ = params_.add("msk", {2, static_cast<std::size_t>(config_.msk_width)});
        for (int l = 0; l < config_.layers; ++l) {
            const std::string p = "layer" + std::to_string(l) + ".";
            Layer t;
            t.ln1_g = params_.add(p + "ln1.gamma", {D});
            t.ln1_b = params_.add(p + "ln1.beta", {D});
            t.wq = params_.add(p + "attn.wq", {D, D});
            t.bq = params_.add(p + "attn.bq", {D});
            t.wk = params_.add(p + "attn.wk", {D, D});
            t.bk = params_.add(p + "attn.bk", {D});
            t.wv = params_.add(p + "attn.wv", {D, D});
            t.bv = params_.add(p + "attn.bv", {D});
            t.wo = params_.add(p + "attn.wo", {D, D});
            t.bo = params_.add(p + "attn.bo", {D});
            t.ln2_g = params_.add(p + "ln2.gamma", {D});
            t.ln2_b = params_.add(p + "ln2.beta", {D});
            t.w1 = params_.add(p + "ff.w1", {D, F});
            t.b1 = params_.add(p + "ff.b1", {F});
            t.w2 = params_.add(p + "ff.w2", {F, D});
            t.b2 = params_.add(p + "ff.b2", {D});
            layers_.push_back(t);
        }
        lnf_g_ = params_.add("final_ln.gamma", {D});
        lnf_b_ = params_.add("final_ln.beta", {D});
        wh_ = params_.add("head.w", {D, static_cast<std::size_t>(kOut)});
        bh_ = params_.add("head.b", {static_cast<std::size_t>(kOut)});
        initialize();
    }

    std::string kind() const override { return "attention"; }
    ParamStore& params() override { return params_; }
    const ParamStore& params() const override { return params_; }
    const GeometryConfig& geometry() const override { return config_.geometry; }
    const AttentionConfig& config() const { return config_; }

    nlohmann::json hyperparameters() const override {
        return {{"layers", config_.layers},     {"heads", config_.heads},         {"tok_width", config_.tok_width},
                {"pos_width", config_.pos_width}, {"msk_width", config_.msk_width}, {"ff_width", config_.ff_width},
                {"head_init", config_.head_init}, {"sublattice_init", config_.sublattice_init},
                {"seed", config_.seed}};
    }

    Mat4 predict_masked(std::span<const std::uint8_t> m, const AccessMask& mask) const override {
        const Bits bits(m.begin(), m.end());
        return predict_batch({bits}, mask).front();
    }

    std::vector<Mat4> predict_many(const std::vector<Bits>& ms, unsigned) const override {
        std::vector<Mat4> out;
        out.reserve(ms.size());
        constexpr std::size_t chunk = 256;
        for (std::size_t s = 0; s < ms.size(); s += chunk) {
            const std::vector<Bits> part(ms.begin() + s, ms.begin() + std::min(ms.size(), s + chunk));
            for (auto& r : predict_batch(part, {})) out.push_back(r);
        }
        return out;
    }

    std::vector<Mat4> predict_batch(const std::vector<Bits>& ms, const AccessMask& mask) const {
        std::vector<const Bits*> ptrs;
        for (const auto& m : ms) ptrs.push_back(&m);
        Tape tape;
        forward(ptrs, mask, tape);
        std::vector<Mat4> out(ms.size());
        for (std::size_t b = 0; b < ms.size(); ++b) {
            const Mat4 h = head_matrix(tape.out.row(static_cast<Eigen::Index>(b)));
            const Mat4 rho = h.adjoint() * h;
            const double tr = rho.trace().real();
            if (!(tr >= 1e-300) || !std::isfinite(tr))
                throw NumericalError("attention prediction has vanishing trace");
            out[b] = qmat::hermitize<4>(rho / tr);
        }
        return out;
    }

    double loss_and_grad(std::span<const TrainExample* const> batch, const AccessMask& mask,
                         ParamVector& grad) const override {
        require(!batch.empty(), "empty minibatch");
        std::vector<const Bits*> ptrs;
        for (const TrainExample* ex : batch) ptrs.push_back(&ex->m);
        Tape tape;
        forward(ptrs, mask, tape);

        const auto B = static_cast<Eigen::Index>(batch.size());
        const double inv_b = 1.0 / static_cast<double>(B);
        RMat d_out(B, kOut);
        double total = 0.0;
        for (Eigen::Index b = 0; b < B; ++b) {
            const Mat4 h = head_matrix(tape.out.row(b));
            const Vec4 phi = batch[static_cast<std::size_t>(b)]->psi();
            const Vec4 v = h * phi;
            const double num = v.squaredNorm();
            const double den = h.squaredNorm();
            if (!(num > 0.0) || !(den > 0.0)) throw NumericalError("attention likelihood vanished");
            total += (std::log(den) - std::log(num)) * kInvLn2;
            const Mat4 gh = (-2.0 * kInvLn2 / num * inv_b) * (v * phi.adjoint()) + (2.0 * kInvLn2 / den * inv_b) * h;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    d_out(b, 4 * i + j) = gh(i, j).real();
                    d_out(b, 16 + 4 * i + j) = gh(i, j).imag();
                }
        }
        grad.assign(params_.size(), 0.0);
        backward(tape, d_out, grad);
        return total * inv_b;
    }

  private:
    struct Layer {
        std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
    };

    struct LayerTape {
        RMat x_in, ln1_hat, ln1_out, q, k, v, ctx, x_mid, ln2_hat, ln2_out, ff_pre, ff_act;
        RVec ln1_rstd, ln2_rstd;
        std::vector<RMat> probs; // [b * heads + h], T x T
    };

    struct Tape {
        Eigen::Index batch = 0, T = 0;
        std::vector<int> positions; // m positions present in the sequence
        std::vector<int> tokens;    // (batch * T), row-major
        std::vector<LayerTape> layers;
        RMat x_final, cls, lnf_hat, lnf_out, out;
        RVec lnf_rstd;
    };

    void initialize() {
        CounterRng rng = CounterRng::for_stream(config_.seed, 0xA7);
        const double D = config_.width();
        const double F = config_.ff_width;
        params_.fill_normal(tok_, 1.0, rng);
        params_.fill_normal(pos_, 1.0, rng);
        params_.fill_normal(msk_, 1.0, rng);
        if (config_.sublattice_init > 0.0) {
            const GeometryConfig& g = config_.geometry;
            const auto sites = g.measured_sites();
            double* pos = params_.real(pos_);
            const auto W = static_cast<std::size_t>(config_.pos_width);
            pos[0] = 0.0; // CLS
            for (std::size_t p = 0; p < sites.size(); ++p) {
                const int s = sites[p];
                const int sub = g.kind == Lattice::Chain ? s % 2 : (s / g.L + s % g.L) % 2;
                pos[(p + 1) * W] = sub ? -config_.sublattice_init : config_.sublattice_init;
            }
        }
        for (const Layer& t : layers_) {
            params_.fill(t.ln1_g, 1.0);
            params_.fill(t.ln2_g, 1.0);
            for (std::size_t w : {t.wq, t.wk, t.wv, t.wo, t.w1}) params_.fill_normal(w, 1.0 / std::sqrt(D), rng);
            params_.fill_normal(t.w2, 1.0 / std::sqrt(F), rng);
        }
        params_.fill(lnf_g_, 1.0);
        params_.fill_normal(wh_, config_.head_init / std::sqrt(D), rng);
        // h starts near the identity, i.e. rho near 1/4.
        double* bh = params_.real(bh_);
        for (int i = 0; i < 4; ++i) bh[4 * i + i] = 1.0;
    }

    CMap mat(std::size_t t) const {
        const auto& s = params_.spec(t);
        return CMap(params_.real(t), static_cast<Eigen::Index>(s.shape[0]), static_cast<Eigen::Index>(s.shape[1]));
    }
    CVMap vec(std::size_t t) const {
        return CVMap(params_.real(t), static_cast<Eigen::Index>(params_.spec(t).elements()));
    }
    Map gmat(ParamVector& g, std::size_t t) const {
        const auto& s = params_.spec(t);
        return Map(g.data() + s.offset, static_cast<Eigen::Index>(s.shape[0]), static_cast<Eigen::Index>(s.shape[1]));
    }
    VMap gvec(ParamVector& g, std::size_t t) const {
        const auto& s = params_.spec(t);
        return VMap(g.data() + s.offset, static_cast<Eigen::Index>(s.elements()));
    }

    static Mat4 head_matrix(const RVec& o) {
        Mat4 h;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) h(i, j) = cplx(o[4 * i + j], o[16 + 4 * i + j]);
        return h;
    }

    static void layer_norm(const RMat& x, const RVec& g, const RVec& b, RMat& hat, RVec& rstd, RMat& out) {
        const Eigen::Index n = x.rows(), d = x.cols();
        hat.resize(n, d);
        rstd.resize(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const double mean = x.row(r).mean();
            const double var = (x.row(r).array() - mean).square().mean();
            rstd[r] = 1.0 / std::sqrt(var + 1e-5);
            hat.row(r) = (x.row(r).array() - mean) * rstd[r];
        }
        out = (hat.array().rowwise() * g.array()).rowwise() + b.array();
    }

    // Returns dx; accumulates dgamma, dbeta.
    static RMat layer_norm_back(const RMat& dy, const RMat& hat, const RVec& rstd, const RVec& g, VMap dg, VMap db) {
        dg += (dy.array() * hat.array()).colwise().sum().matrix();
        db += dy.colwise().sum();
        const RMat dhat = dy.array().rowwise() * g.array();
        RMat dx(dy.rows(), dy.cols());
        const double inv_d = 1.0 / static_cast<double>(dy.cols());
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
            const double m1 = dhat.row(r).sum() * inv_d;
            const double m2 = (dhat.row(r).array() * hat.row(r).array()).sum() * inv_d;
            dx.row(r) = rstd[r] * (dhat.row(r).array() - m1 - hat.row(r).array() * m2);
        }
        return dx;
    }

    static double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }
    static double gelu_grad(double x) {
        const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + x * pdf;
    }

    void forward(const std::vector<const Bits*>& ms, const AccessMask& mask, Tape& tape) const {
        const int M = config_.geometry.num_measured();
        require(mask.empty() || static_cast<int>(mask.size()) == M, "access mask length does not match geometry");
        tape.positions.clear();
        for (int p = 0; p < M; ++p)
            if (mask.empty() || mask[p]) tape.positions.push_back(p);
        const auto B = static_cast<Eigen::Index>(ms.size());
        const auto T = static_cast<Eigen::Index>(tape.positions.size() + 1);
        const Eigen::Index D = config_.width();
        const int tw = config_.tok_width, pw = config_.pos_width, mw = config_.msk_width;
        tape.batch = B;
        tape.T = T;
        tape.tokens.assign(static_cast<std::size_t>(B * T), kTokCls);

        const CMap tok = mat(tok_), pos = mat(pos_), msk = mat(msk_);
        RMat x(B * T, D);
        for (Eigen::Index b = 0; b < B; ++b) {
            const Bits& m = *ms[static_cast<std::size_t>(b)];
            require(static_cast<int>(m.size()) == M, "outcome string length does not match the attention model");
            for (Eigen::Index t = 0; t < T; ++t) {
                const int p = t == 0 ? -1 : tape.positions[static_cast<std::size_t>(t - 1)];
                const int token = t == 0 ? kTokCls : static_cast<int>(m[p]);
                tape.tokens[static_cast<std::size_t>(b * T + t)] = token;
                const Eigen::Index r = b * T + t;
                x.row(r).segment(0, tw) = tok.row(token);
                x.row(r).segment(tw, pw) = pos.row(p + 1);
                x.row(r).segment(tw + pw, mw) = msk.row(0);
            }
        }

        const int H = config_.heads;
        const Eigen::Index dh = D / H;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        tape.layers.resize(layers_.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& w = layers_[l];
            LayerTape& lt = tape.layers[l];
            lt.x_in = x;
            layer_norm(x, vec(w.ln1_g), vec(w.ln1_b), lt.ln1_hat, lt.ln1_rstd, lt.ln1_out);
            lt.q = (lt.ln1_out * mat(w.wq)).rowwise() + vec(w.bq);
            lt.k = (lt.ln1_out * mat(w.wk)).rowwise() + vec(w.bk);
            lt.v = (lt.ln1_out * mat(w.wv)).rowwise() + vec(w.bv);
            lt.ctx.resize(B * T, D);
            lt.probs.resize(static_cast<std::size_t>(B * H));
            for (Eigen::Index b = 0; b < B; ++b)
                for (int h = 0; h < H; ++h) {
                    RMat s = lt.q.block(b * T, h * dh, T, dh) * lt.k.block(b * T, h * dh, T, dh).transpose() * scale;
                    for (Eigen::Index r = 0; r < T; ++r) {
                        const double mx = s.row(r).maxCoeff();
                        s.row(r) = (s.row(r).array() - mx).exp();
                        s.row(r) /= s.row(r).sum();
                    }
                    lt.ctx.block(b * T, h * dh, T, dh) = s * lt.v.block(b * T, h * dh, T, dh);
                    lt.probs[static_cast<std::size_t>(b * H + h)] = std::move(s);
                }
            lt.x_mid = x + ((lt.ctx * mat(w.wo)).rowwise() + vec(w.bo));
            layer_norm(lt.x_mid, vec(w.ln2_g), vec(w.ln2_b), lt.ln2_hat, lt.ln2_rstd, lt.ln2_out);
            lt.ff_pre = (lt.ln2_out * mat(w.w1)).rowwise() + vec(w.b1);
            lt.ff_act = lt.ff_pre.unaryExpr([](double v) { return gelu(v); });
            x = lt.x_mid + ((lt.ff_act * mat(w.w2)).rowwise() + vec(w.b2));
        }
        tape.cls.resize(B, D);
        for (Eigen::Index b = 0; b < B; ++b) tape.cls.row(b) = x.row(b * T);
        layer_norm(tape.cls, vec(lnf_g_), vec(lnf_b_), tape.lnf_hat, tape.lnf_rstd, tape.lnf_out);
        tape.out = (tape.lnf_out * mat(wh_)).rowwise() + vec(bh_);
    }

    void backward(const Tape& tape, const RMat& d_out, ParamVector& g) const {
        const Eigen::Index B = tape.batch, T = tape.T, D = config_.width();
        const int H = config_.heads;
        const Eigen::Index dh = D / H;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

        gmat(g, wh_).noalias() += tape.lnf_out.transpose() * d_out;
        gvec(g, bh_) += d_out.colwise().sum();
        const RMat d_lnf = d_out * mat(wh_).transpose();
        const RMat d_cls =
            layer_norm_back(d_lnf, tape.lnf_hat, tape.lnf_rstd, vec(lnf_g_), gvec(g, lnf_g_), gvec(g, lnf_b_));
        RMat dx = RMat::Zero(B * T, D);
        for (Eigen::Index b = 0; b < B; ++b) dx.row(b * T) = d_cls.row(b);

        for (std::size_t li = layers_.size(); li-- > 0;) {
            const Layer& w = layers_[li];
            const LayerTape& lt = tape.layers[li];
            // Feedforward block; dx is the gradient at the layer output.
            gmat(g, w.w2).noalias() += lt.ff_act.transpose() * dx;
            gvec(g, w.b2) += dx.colwise().sum();
            RMat d_act = dx * mat(w.w2).transpose();
            d_act.array() *= lt.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
            gmat(g, w.w1).noalias() += lt.ln2_out.transpose() * d_act;
            gvec(g, w.b1) += d_act.colwise().sum();
            const RMat d_ln2 = d_act * mat(w.w1).transpose();
            RMat d_mid = dx + layer_norm_back(d_ln2, lt.ln2_hat, lt.ln2_rstd, vec(w.ln2_g), gvec(g, w.ln2_g),
                                              gvec(g, w.ln2_b));
            // Attention block.
            gmat(g, w.wo).noalias() += lt.ctx.transpose() * d_mid;
            gvec(g, w.bo) += d_mid.colwise().sum();
            const RMat d_ctx = d_mid * mat(w.wo).transpose();
            RMat dq(B * T, D), dk(B * T, D), dv(B * T, D);
            for (Eigen::Index b = 0; b < B; ++b)
                for (int h = 0; h < H; ++h) {
                    const RMat& p = lt.probs[static_cast<std::size_t>(b * H + h)];
                    const auto dc = d_ctx.block(b * T, h * dh, T, dh);
                    dv.block(b * T, h * dh, T, dh) = p.transpose() * dc;
                    RMat dp = dc * lt.v.block(b * T, h * dh, T, dh).transpose();
                    const Eigen::VectorXd rs = (dp.array() * p.array()).rowwise().sum();
                    RMat ds = p.array() * (dp.array().colwise() - rs.array());
                    ds *= scale;
                    dq.block(b * T, h * dh, T, dh) = ds * lt.k.block(b * T, h * dh, T, dh);
                    dk.block(b * T, h * dh, T, dh) = ds.transpose() * lt.q.block(b * T, h * dh, T, dh);
                }
            gmat(g, w.wq).noalias() += lt.ln1_out.transpose() * dq;
            gmat(g, w.wk).noalias() += lt.ln1_out.transpose() * dk;
            gmat(g, w.wv).noalias() += lt.ln1_out.transpose() * dv;
            gvec(g, w.bq) += dq.colwise().sum();
            gvec(g, w.bk) += dk.colwise().sum();
            gvec(g, w.bv) += dv.colwise().sum();
            const RMat d_ln1 =
                dq * mat(w.wq).transpose() + dk * mat(w.wk).transpose() + dv * mat(w.wv).transpose();
            dx = d_mid + layer_norm_back(d_ln1, lt.ln1_hat, lt.ln1_rstd, vec(w.ln1_g), gvec(g, w.ln1_g),
                                         gvec(g, w.ln1_b));
        }

        const int tw = config_.tok_width, pw = config_.pos_width, mw = config_.msk_width;
        Map gt = gmat(g, tok_), gp = gmat(g, pos_), gm = gmat(g, msk_);
        for (Eigen::Index b = 0; b < B; ++b)
            for (Eigen::Index t = 0; t < T; ++t) {
                const Eigen::Index r = b * T + t;
                const int p = t == 0 ? -1 : tape.positions[static_cast<std::size_t>(t - 1)];
                gt.row(tape.tokens[static_cast<std::size_t>(r)]) += dx.row(r).segment(0, tw);
                gp.row(p + 1) += dx.row(r).segment(tw, pw);
                gm.row(0) += dx.row(r).segment(tw + pw, mw);
            }
    }

    AttentionConfig config_;
    ParamStore params_;
    std::size_t tok_ = 0, pos_ = 0, msk_ = 0, lnf_g_ = 0, lnf_b_ = 0, wh_ = 0, bh_ = 0;
    std::vector<Layer> layers_;
};

} // namespace mie::learn
