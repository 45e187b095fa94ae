#ifndef NETSIMP_NN_LAYERS_HPP
#define NETSIMP_NN_LAYERS_HPP

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "netsimp/graph.hpp"
#include "netsimp/nn/tape.hpp"
#include "netsimp/rng.hpp"

namespace netsimp::nn {

// Feature fields over a graph are (V, C, T) tensors stored as (V*C) x T
// tape nodes, rows grouped per node: row v*C + c is channel c of node v.

constexpr double kDefaultLeakySlope = 0.2;

struct Param {
    std::string name;
    int rows = 0, cols = 0;
    Eigen::VectorXd value;  // row-major
    Eigen::VectorXd grad;   // accumulated by the optimizer driver

    Param() = default;
    Param(std::string n, int r, int c)
        : name(std::move(n)), rows(r), cols(c), value(Eigen::VectorXd::Zero(r * c)),
          grad(Eigen::VectorXd::Zero(r * c)) {}

    int size() const { return rows * cols; }
};

/// Uniform fan-in init for linear/conv maps.
inline void init_fan_in(Param& p, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
    for (int i = 0; i < p.size(); ++i) p.value[i] = (2.0 * rng.next_double() - 1.0) * bound;
}

/// Near-zero init; keeps initial attention close to uniform.
inline void init_near_zero(Param& p, Rng& rng) {
    for (int i = 0; i < p.size(); ++i) p.value[i] = (2.0 * rng.next_double() - 1.0) * 0.01;
}

/// Per-tape build context. Parameters are staked onto the tape once each;
/// frozen networks enter as constants so the sweep stops at them.
struct Ctx {
    Tape& tape;
    bool train = true;
    std::unordered_map<const Param*, int> staked;

    int use(Param& p) {
        auto it = staked.find(&p);
        if (it != staked.end()) return it->second;
        const int id = train ? tape.leaf(p.rows, p.cols, p.value)
                             : tape.constant(p.rows, p.cols, p.value);
        staked.emplace(&p, id);
        return id;
    }

    /// Adds d(loss)/d(param) into each param's grad buffer, scaled.
    void collect_grads(const std::vector<int>& gradof, double scale = 1.0) {
        for (auto& [param, node] : staked) {
            if (node >= static_cast<int>(gradof.size())) continue;
            const int g = gradof[static_cast<size_t>(node)];
            if (g < 0) continue;
            const_cast<Param*>(param)->grad += scale * tape.val(g);
        }
    }
};

namespace maps {

/// (V,C,T) field -> T stacked timestamp blocks, block t = V x C matrix.
inline IdxMap field_to_tstack(int v_count, int chans, int t_total) {
    auto m = std::make_shared<std::vector<int>>(
        static_cast<size_t>(v_count) * chans * t_total);
    for (int t = 0; t < t_total; ++t)
        for (int v = 0; v < v_count; ++v)
            for (int c = 0; c < chans; ++c)
                (*m)[static_cast<size_t>((t * v_count + v) * chans + c)] =
                    (v * chans + c) * t_total + t;
    return m;
}

/// Inverse of field_to_tstack.
inline IdxMap tstack_to_field(int v_count, int chans, int t_total) {
    auto m = std::make_shared<std::vector<int>>(
        static_cast<size_t>(v_count) * chans * t_total);
    for (int v = 0; v < v_count; ++v)
        for (int c = 0; c < chans; ++c)
            for (int t = 0; t < t_total; ++t)
                (*m)[static_cast<size_t>((v * chans + c) * t_total + t)] =
                    (t * v_count + v) * chans + c;
    return m;
}

/// (V,C,T) field -> (V*T) x C rows grouped per node (node-major).
inline IdxMap field_to_vmajor_rows(int v_count, int chans, int len) {
    auto m = std::make_shared<std::vector<int>>(static_cast<size_t>(v_count) * chans * len);
    for (int v = 0; v < v_count; ++v)
        for (int t = 0; t < len; ++t)
            for (int c = 0; c < chans; ++c)
                (*m)[static_cast<size_t>((v * len + t) * chans + c)] = (v * chans + c) * len + t;
    return m;
}

/// Inverse of field_to_vmajor_rows.
inline IdxMap vmajor_rows_to_field(int v_count, int chans, int len) {
    auto m = std::make_shared<std::vector<int>>(static_cast<size_t>(v_count) * chans * len);
    for (int v = 0; v < v_count; ++v)
        for (int c = 0; c < chans; ++c)
            for (int t = 0; t < len; ++t)
                (*m)[static_cast<size_t>((v * chans + c) * len + t)] = (v * len + t) * chans + c;
    return m;
}

/// Tiles a (t*V) x 1 column so entry ((t*V+i), j) reads source (t*V+j).
inline IdxMap neighbor_score_tile(int v_count, int t_total) {
    auto m = std::make_shared<std::vector<int>>(
        static_cast<size_t>(t_total) * v_count * v_count);
    for (int t = 0; t < t_total; ++t)
        for (int i = 0; i < v_count; ++i)
            for (int j = 0; j < v_count; ++j)
                (*m)[static_cast<size_t>((t * v_count + i) * v_count + j)] = t * v_count + j;
    return m;
}

}  // namespace maps

/// Graph attention over node features, decoupled per timestamp.
///
/// Scores e_ijt = LeakyReLU(a^T [theta y_i || theta y_j]) are softmax-
/// normalized over N(i) u {i}; output is the attention-weighted sum of
/// transformed features.
class GatLayer {
public:
    GatLayer(std::string name, const Graph& graph, int in_features, int out_features,
             int t_total, Rng& rng, double slope = kDefaultLeakySlope)
        : graph_(&graph), in_f_(in_features), out_f_(out_features), t_total_(t_total),
          slope_(slope),
          theta(name + ".theta", out_features, in_features),
          attn(name + ".attn", 2 * out_features, 1) {
        init_fan_in(theta, in_features, rng);
        init_near_zero(attn, rng);
        const int v = graph.node_count();
        to_stack_ = maps::field_to_tstack(v, in_f_, t_total);
        from_stack_ = maps::tstack_to_field(v, out_f_, t_total);
        score_tile_ = maps::neighbor_score_tile(v, t_total);
        // 0 where j is i itself or a neighbor, -1e30 elsewhere
        Eigen::MatrixXd block = Eigen::MatrixXd::Constant(v, v, -1e30);
        for (int i = 0; i < v; ++i) {
            block(i, i) = 0.0;
            for (int j : graph.neighbors(i)) block(i, j) = 0.0;
        }
        mask_tile_.resize(static_cast<Eigen::Index>(t_total) * v * v);
        for (int t = 0; t < t_total; ++t)
            Tape::MapT(mask_tile_.data() + static_cast<Eigen::Index>(t) * v * v, v, v) = block;
    }

    int forward(Ctx& ctx, int x) { return forward_impl(ctx, x).first; }

    /// Also exposes the (t*V) x V attention matrix for inspection.
    std::pair<int, int> forward_with_attention(Ctx& ctx, int x) { return forward_impl(ctx, x); }

    std::vector<Param*> params() { return {&theta, &attn}; }

    Param theta;  // out_features x in_features
    Param attn;   // stacked [a_self; a_neigh], each out_features long

private:
    std::pair<int, int> forward_impl(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        const int v = graph_->node_count();
        if (tp.rows(x) != v * in_f_ || tp.cols(x) != t_total_)
            throw std::invalid_argument("gat: input shape mismatch");
        for (Eigen::Index i = 0; i < tp.val(x).size(); ++i)
            if (!std::isfinite(tp.val(x)[i]))
                throw std::invalid_argument("gat: non-finite node feature");
        const int th = ctx.use(theta);
        const int av = ctx.use(attn);
        const int stack = tp.gather(x, to_stack_, t_total_ * v, in_f_);
        const int feat = tp.matmul(stack, th, false, true);  // (t*V) x F'
        const int a_self = tp.slice_rows(av, 0, out_f_);
        const int a_neigh = tp.slice_rows(av, out_f_, 2 * out_f_);
        const int score_i = tp.bcast_col(tp.matmul(feat, a_self), v);
        const int score_j = tp.gather(tp.matmul(feat, a_neigh), score_tile_, t_total_ * v, v);
        const int pre = tp.leaky_relu(tp.add(score_i, score_j), slope_);
        const int masked = tp.add(pre, tp.constant(t_total_ * v, v, mask_tile_));
        const int alpha = tp.softmax_rows(masked);
        const int mixed = tp.block_matmul(alpha, feat, t_total_);
        return {tp.gather(mixed, from_stack_, v * out_f_, t_total_), alpha};
    }

    const Graph* graph_;
    int in_f_, out_f_, t_total_;
    double slope_;
    IdxMap to_stack_, from_stack_, score_tile_;
    Eigen::VectorXd mask_tile_;
};

/// Static-weight graph convolution (no-attention variant): self features
/// and weight-scaled neighbor sums under separate learnable maps.
class GraphConvLayer {
public:
    GraphConvLayer(std::string name, const Graph& graph, int in_features, int out_features,
                   int t_total, Rng& rng)
        : graph_(&graph), in_f_(in_features), out_f_(out_features), t_total_(t_total),
          w_self(name + ".w_self", out_features, in_features),
          w_neigh(name + ".w_neigh", out_features, in_features),
          bias(name + ".bias", 1, out_features) {
        init_fan_in(w_self, in_features, rng);
        init_fan_in(w_neigh, in_features, rng);
        init_fan_in(bias, in_features, rng);
        const int v = graph.node_count();
        to_stack_ = maps::field_to_tstack(v, in_f_, t_total);
        from_stack_ = maps::tstack_to_field(v, out_f_, t_total);
        Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(v, v);
        for (const auto& e : graph.edges()) {
            const double w = graph.weight(e.first, e.second);
            adj(e.first, e.second) = w;
            adj(e.second, e.first) = w;
        }
        adj_tile_.resize(static_cast<Eigen::Index>(t_total) * v * v);
        for (int t = 0; t < t_total; ++t)
            Tape::MapT(adj_tile_.data() + static_cast<Eigen::Index>(t) * v * v, v, v) = adj;
    }

    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        const int v = graph_->node_count();
        if (tp.rows(x) != v * in_f_ || tp.cols(x) != t_total_)
            throw std::invalid_argument("graphconv: input shape mismatch");
        const int stack = tp.gather(x, to_stack_, t_total_ * v, in_f_);
        const int adj = tp.constant(t_total_ * v, v, adj_tile_);
        const int agg = tp.block_matmul(adj, stack, t_total_);  // neighbor sums
        const int out = tp.add(tp.matmul(stack, ctx.use(w_self), false, true),
                               tp.matmul(agg, ctx.use(w_neigh), false, true));
        const int biased = tp.add(out, tp.bcast_row(ctx.use(bias), t_total_ * v));
        return tp.gather(biased, from_stack_, v * out_f_, t_total_);
    }

    std::vector<Param*> params() { return {&w_self, &w_neigh, &bias}; }

    Param w_self, w_neigh, bias;

private:
    const Graph* graph_;
    int in_f_, out_f_, t_total_;
    IdxMap to_stack_, from_stack_;
    Eigen::VectorXd adj_tile_;
};

/// Per-(node,timestamp) linear map across channels; the graph-free stand-in
/// where a removed GAT layer must still collapse feature channels.
class ChannelLinear {
public:
    ChannelLinear(std::string name, int v_count, int in_features, int out_features, int t_total,
                  Rng& rng)
        : v_(v_count), in_f_(in_features), out_f_(out_features), t_total_(t_total),
          weight(name + ".weight", out_features, in_features),
          bias(name + ".bias", 1, out_features) {
        init_fan_in(weight, in_features, rng);
        init_fan_in(bias, in_features, rng);
        fwd_ = maps::field_to_vmajor_rows(v_, in_f_, t_total_);
        back_ = maps::vmajor_rows_to_field(v_, out_f_, t_total_);
    }

    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        if (tp.rows(x) != v_ * in_f_ || tp.cols(x) != t_total_)
            throw std::invalid_argument("channel linear: input shape mismatch");
        const int flat = tp.gather(x, fwd_, v_ * t_total_, in_f_);
        const int y = tp.add(tp.matmul(flat, ctx.use(weight), false, true),
                             tp.bcast_row(ctx.use(bias), v_ * t_total_));
        return tp.gather(y, back_, v_ * out_f_, t_total_);
    }

    std::vector<Param*> params() { return {&weight, &bias}; }

    Param weight, bias;

private:
    int v_, in_f_, out_f_, t_total_;
    IdxMap fwd_, back_;
};

/// Multi-head self-attention along the temporal axis of a V x T signal.
class MultiHeadSelfAttention {
public:
    MultiHeadSelfAttention(std::string name, int v_count, int t_total, int heads, int head_dim,
                           Rng& rng)
        : v_(v_count), t_(t_total), heads_(heads), dim_(head_dim) {
        if (heads < 1 || head_dim < 1) throw std::invalid_argument("mhsa: d_k must be positive");
        for (int h = 0; h < heads; ++h) {
            wq.emplace_back(name + ".wq" + std::to_string(h), v_count, head_dim);
            wk.emplace_back(name + ".wk" + std::to_string(h), v_count, head_dim);
            wv.emplace_back(name + ".wv" + std::to_string(h), v_count, head_dim);
            init_fan_in(wq.back(), v_count, rng);
            init_fan_in(wk.back(), v_count, rng);
            init_fan_in(wv.back(), v_count, rng);
        }
        wo = Param(name + ".wo", v_count, heads * head_dim);
        init_fan_in(wo, heads * head_dim, rng);
    }

    int forward(Ctx& ctx, int x) { return forward_impl(ctx, x).first; }

    /// Returns {output, per-head T x T attention matrices}.
    std::pair<int, std::vector<int>> forward_impl(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        if (tp.rows(x) != v_ || tp.cols(x) != t_)
            throw std::invalid_argument("mhsa: input must be V x T");
        std::vector<int> head_outs, attns;
        const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dim_));
        for (int h = 0; h < heads_; ++h) {
            const int q = tp.matmul(x, ctx.use(wq[static_cast<size_t>(h)]), true, false);
            const int k = tp.matmul(x, ctx.use(wk[static_cast<size_t>(h)]), true, false);
            const int v = tp.matmul(x, ctx.use(wv[static_cast<size_t>(h)]), true, false);
            const int logits = tp.scale(tp.matmul(q, k, false, true), inv_sqrt);
            const int attn = tp.softmax_rows(logits);  // T x T
            attns.push_back(attn);
            head_outs.push_back(tp.matmul(attn, v));  // T x d_v
        }
        const int cat = heads_ == 1 ? head_outs[0] : tp.concat_cols(head_outs);
        return {tp.matmul(ctx.use(wo), cat, false, true), attns};  // V x T
    }

    std::vector<Param*> params() {
        std::vector<Param*> ps;
        for (auto& p : wq) ps.push_back(&p);
        for (auto& p : wk) ps.push_back(&p);
        for (auto& p : wv) ps.push_back(&p);
        ps.push_back(&wo);
        return ps;
    }

    std::vector<Param> wq, wk, wv;
    Param wo;

private:
    int v_, t_, heads_, dim_;
};

/// Strided 1-D convolution along time, applied per node. Kernel 3, stride 2,
/// padding 1: halves even temporal lengths exactly.
class Conv1d {
public:
    static constexpr int kKernel = 3, kStride = 2, kPad = 1;

    Conv1d(std::string name, int v_count, int c_in, int c_out, int len_in, Rng& rng)
        : v_(v_count), cin_(c_in), cout_(c_out), lin_(len_in),
          lout_((len_in + 2 * kPad - kKernel) / kStride + 1),
          weight(name + ".weight", c_out, c_in * kKernel), bias(name + ".bias", 1, c_out) {
        if (len_in % 2 != 0)
            throw std::invalid_argument("conv1d: temporal length " + std::to_string(len_in) +
                                        " is not divisible by 2");
        init_fan_in(weight, c_in * kKernel, rng);
        init_fan_in(bias, c_in * kKernel, rng);
        auto m = std::make_shared<std::vector<int>>(
            static_cast<size_t>(v_) * lout_ * cin_ * kKernel);
        for (int v = 0; v < v_; ++v)
            for (int o = 0; o < lout_; ++o)
                for (int c = 0; c < cin_; ++c)
                    for (int k = 0; k < kKernel; ++k) {
                        const int t = o * kStride - kPad + k;
                        (*m)[static_cast<size_t>(((v * lout_ + o) * cin_ + c) * kKernel + k)] =
                            (t < 0 || t >= lin_) ? -1 : (v * cin_ + c) * lin_ + t;
                    }
        im2col_ = m;
        out_map_ = maps::vmajor_rows_to_field(v_, cout_, lout_);
    }

    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        if (tp.rows(x) != v_ * cin_ || tp.cols(x) != lin_)
            throw std::invalid_argument("conv1d: input shape mismatch");
        const int cols = tp.gather(x, im2col_, v_ * lout_, cin_ * kKernel);
        const int y = tp.add(tp.matmul(cols, ctx.use(weight), false, true),
                             tp.bcast_row(ctx.use(bias), v_ * lout_));
        return tp.gather(y, out_map_, v_ * cout_, lout_);
    }

    int len_out() const { return lout_; }
    std::vector<Param*> params() { return {&weight, &bias}; }

    Param weight, bias;

private:
    int v_, cin_, cout_, lin_, lout_;
    IdxMap im2col_, out_map_;
};

/// Strided 1-D transposed convolution along time, applied per node.
/// Kernel 3, stride 2, padding 1, output padding 1: doubles the length.
class Deconv1d {
public:
    static constexpr int kKernel = 3, kStride = 2, kPad = 1;

    Deconv1d(std::string name, int v_count, int c_in, int c_out, int len_in, Rng& rng)
        : v_(v_count), cin_(c_in), cout_(c_out), lin_(len_in), lout_(2 * len_in),
          weight(name + ".weight", c_in, c_out * kKernel), bias(name + ".bias", 1, c_out) {
        init_fan_in(weight, c_in, rng);
        init_fan_in(bias, c_in, rng);
        in_map_ = maps::field_to_vmajor_rows(v_, cin_, lin_);
        auto m = std::make_shared<std::vector<int>>(
            static_cast<size_t>(v_) * lin_ * cout_ * kKernel);
        for (int v = 0; v < v_; ++v)
            for (int i = 0; i < lin_; ++i)
                for (int c = 0; c < cout_; ++c)
                    for (int k = 0; k < kKernel; ++k) {
                        const int t = i * kStride - kPad + k;
                        (*m)[static_cast<size_t>(((v * lin_ + i) * cout_ + c) * kKernel + k)] =
                            (t < 0 || t >= lout_) ? -1 : (v * cout_ + c) * lout_ + t;
                    }
        col2im_ = m;
        auto bm = std::make_shared<std::vector<int>>(static_cast<size_t>(v_) * cout_ * lout_);
        for (int v = 0; v < v_; ++v)
            for (int c = 0; c < cout_; ++c)
                for (int t = 0; t < lout_; ++t)
                    (*bm)[static_cast<size_t>((v * cout_ + c) * lout_ + t)] = c;
        bias_map_ = bm;
    }

    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        if (tp.rows(x) != v_ * cin_ || tp.cols(x) != lin_)
            throw std::invalid_argument("deconv1d: input shape mismatch");
        const int rows = tp.gather(x, in_map_, v_ * lin_, cin_);
        const int contrib = tp.matmul(rows, ctx.use(weight));  // (v*lin) x (cout*kernel)
        const int y = tp.scatter_add(contrib, col2im_, v_ * cout_, lout_);
        return tp.add(y, tp.gather(ctx.use(bias), bias_map_, v_ * cout_, lout_));
    }

    int len_out() const { return lout_; }
    std::vector<Param*> params() { return {&weight, &bias}; }

    Param weight, bias;

private:
    int v_, cin_, cout_, lin_, lout_;
    IdxMap in_map_, col2im_, bias_map_;
};

/// Fully connected layer on 1 x n rows.
class Dense {
public:
    Dense(std::string name, int in_features, int out_features, Rng& rng)
        : in_f_(in_features), out_f_(out_features),
          weight(name + ".weight", out_features, in_features),
          bias(name + ".bias", 1, out_features) {
        init_fan_in(weight, in_features, rng);
        init_fan_in(bias, in_features, rng);
    }

    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        if (tp.cols(x) != in_f_) throw std::invalid_argument("dense: input width mismatch");
        return tp.add(tp.matmul(x, ctx.use(weight), false, true),
                      tp.bcast_row(ctx.use(bias), tp.rows(x)));
    }

    std::vector<Param*> params() { return {&weight, &bias}; }

    Param weight, bias;

private:
    int in_f_, out_f_;
};

/// Concatenates two (V,C,T) fields along the channel dimension.
inline int concat_channels(Tape& tp, int a, int ca, int b, int cb, int v_count, int t_total) {
    if (tp.rows(a) != v_count * ca || tp.rows(b) != v_count * cb ||
        tp.cols(a) != t_total || tp.cols(b) != t_total)
        throw std::invalid_argument("concat_channels: shape mismatch");
    auto m = std::make_shared<std::vector<int>>(
        static_cast<size_t>(v_count) * (ca + cb) * t_total);
    // stacked rows: a block then b block
    for (int v = 0; v < v_count; ++v)
        for (int c = 0; c < ca + cb; ++c)
            for (int t = 0; t < t_total; ++t)
                (*m)[static_cast<size_t>((v * (ca + cb) + c) * t_total + t)] =
                    c < ca ? (v * ca + c) * t_total + t
                           : (v_count * ca) * t_total + (v * cb + (c - ca)) * t_total + t;
    return tp.gather(tp.concat_rows({a, b}), m, v_count * (ca + cb), t_total);
}

}  // namespace netsimp::nn

#endif  // NETSIMP_NN_LAYERS_HPP
