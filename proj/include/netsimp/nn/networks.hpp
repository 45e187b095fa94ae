#ifndef NETSIMP_NN_NETWORKS_HPP
#define NETSIMP_NN_NETWORKS_HPP

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsimp/graph.hpp"
#include "netsimp/nn/layers.hpp"
#include "netsimp/nn/tape.hpp"
#include "netsimp/rng.hpp"

namespace netsimp::nn {

/// Ablation switches: which building blocks the networks keep.
enum class Variant { Full, NoGraph, NoTemporal, NoAttention };

inline Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no-graph") return Variant::NoGraph;
    if (s == "no-temporal") return Variant::NoTemporal;
    if (s == "no-attention") return Variant::NoAttention;
    throw std::invalid_argument("unknown variant '" + s +
                                "' (expected full|no-graph|no-temporal|no-attention)");
}

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoGraph: return "no-graph";
        case Variant::NoTemporal: return "no-temporal";
        case Variant::NoAttention: return "no-attention";
    }
    return "?";
}

struct GtanConfig {
    Variant variant = Variant::Full;
    int t_total = 16;
    int tconv_depth = 3;     // L
    int base_channels = 16;  // channels after the first contracting conv
    int heads = 3;
    int head_dim = 0;        // 0 -> ceil(V / heads)
    int noise_dim = 128;     // mask-generator input
    double leaky_slope = kDefaultLeakySlope;

    int resolved_head_dim(int v_count) const {
        return head_dim > 0 ? head_dim : (v_count + heads - 1) / heads;
    }

    bool has_temporal() const { return variant != Variant::NoTemporal; }
    bool has_self_attention() const {
        return variant == Variant::Full || variant == Variant::NoGraph;
    }

    void validate(int /*v_count*/) const {
        if (t_total < 2) throw std::invalid_argument("gtan: t_total too small");
        if (has_temporal()) {
            if (tconv_depth < 1) throw std::invalid_argument("gtan: tconv_depth must be >= 1");
            int len = t_total;
            for (int l = 0; l < tconv_depth; ++l) {
                if (len % 2 != 0)
                    throw std::invalid_argument(
                        "gtan: t_total=" + std::to_string(t_total) + " is not divisible by 2^L (fails at length " +
                        std::to_string(len) + ")");
                len /= 2;
            }
        }
        if (heads < 1) throw std::invalid_argument("gtan: heads must be >= 1");
        if (base_channels < 1) throw std::invalid_argument("gtan: base_channels must be >= 1");
    }
};

namespace detail {

/// Either a GAT layer, a static-weight graph convolution, a channel-collapse
/// linear map, or a pass-through, depending on the variant.
class GraphStage {
public:
    GraphStage(const std::string& name, const GtanConfig& cfg, const Graph& graph,
               int in_features, int out_features, int t_total, Rng& rng) {
        switch (cfg.variant) {
            case Variant::Full:
            case Variant::NoTemporal:
                gat_.emplace(name, graph, in_features, out_features, t_total, rng,
                             cfg.leaky_slope);
                break;
            case Variant::NoAttention:
                conv_.emplace(name, graph, in_features, out_features, t_total, rng);
                break;
            case Variant::NoGraph:
                // GAT removed: identity when shapes allow, else a per-entry
                // linear map to collapse channels.
                if (in_features != out_features)
                    lin_.emplace(name, graph.node_count(), in_features, out_features, t_total,
                                 rng);
                break;
        }
    }

    int forward(Ctx& ctx, int x) {
        if (gat_) return gat_->forward(ctx, x);
        if (conv_) return conv_->forward(ctx, x);
        if (lin_) return lin_->forward(ctx, x);
        return x;
    }

    std::vector<Param*> params() {
        if (gat_) return gat_->params();
        if (conv_) return conv_->params();
        if (lin_) return lin_->params();
        return {};
    }

    /// True when the stage passes data through unchanged (removed GAT with
    /// matching channel counts); no activation follows an identity stage.
    bool is_identity() const { return !gat_ && !conv_ && !lin_; }

    GatLayer* gat() { return gat_ ? &*gat_ : nullptr; }

private:
    std::optional<GatLayer> gat_;
    std::optional<GraphConvLayer> conv_;
    std::optional<ChannelLinear> lin_;
};

inline void append(std::vector<Param*>& into, const std::vector<Param*>& more) {
    into.insert(into.end(), more.begin(), more.end());
}

}  // namespace detail

/// Contracting temporal-convolution path: channels double, lengths halve.
class TConvContract {
public:
    TConvContract(const std::string& name, const GtanConfig& cfg, int v_count, Rng& rng) {
        int len = cfg.t_total;
        int c_in = 1;
        for (int l = 1; l <= cfg.tconv_depth; ++l) {
            const int c_out = cfg.base_channels << (l - 1);
            layers_.emplace_back(name + ".con" + std::to_string(l), v_count, c_in, c_out, len,
                                 rng);
            len = layers_.back().len_out();
            c_in = c_out;
        }
    }

    /// Returns the per-layer outputs (post-activation), outermost first.
    std::vector<int> forward(Ctx& ctx, int x, double slope) {
        std::vector<int> outs;
        int h = x;
        for (auto& layer : layers_) {
            h = ctx.tape.leaky_relu(layer.forward(ctx, h), slope);
            outs.push_back(h);
        }
        return outs;
    }

    std::vector<Param*> params() {
        std::vector<Param*> ps;
        for (auto& l : layers_) detail::append(ps, l.params());
        return ps;
    }

    size_t depth() const { return layers_.size(); }
    int out_channels(int l) const {  // 1-indexed layer
        return l == 0 ? 1 : layers_[static_cast<size_t>(l - 1)].weight.rows;
    }

private:
    std::vector<Conv1d> layers_;
};

/// Expansive path: channels halve, lengths double; expansive layer l
/// consumes the skip H_con^(L-l+1) concatenated along channels.
class TConvExpand {
public:
    TConvExpand(const std::string& name, const GtanConfig& cfg, int v_count, bool with_skips,
                Rng& rng)
        : v_(v_count), with_skips_(with_skips) {
        const int depth = cfg.tconv_depth;
        const int top = cfg.base_channels << (depth - 1);
        int len = cfg.t_total >> depth;
        int c_prev = with_skips ? top : 1;  // mask generator starts from 1 channel
        for (int l = 1; l <= depth; ++l) {
            const int c_skip = with_skips ? (cfg.base_channels << (depth - l)) : 0;
            const int c_out = l == depth ? 1 : cfg.base_channels << (depth - l - 1);
            h_channels_.push_back(c_prev);
            skip_channels_.push_back(c_skip);
            layers_.emplace_back(name + ".exp" + std::to_string(l), v_count, c_prev + c_skip,
                                 c_out, len, rng);
            len = layers_.back().len_out();
            c_prev = c_out;
        }
    }

    /// `skips` are the contracting outputs, outermost first (ignored when
    /// built without skips). Expansive layer l consumes skip L-l+1; for l=1
    /// that is the bottleneck itself.
    int forward(Ctx& ctx, int x, const std::vector<int>& skips, double slope) {
        int h = x;
        for (size_t l = 0; l < layers_.size(); ++l) {
            int input = h;
            if (with_skips_) {
                const int skip = skips[skips.size() - 1 - l];
                input = concat_channels(ctx.tape, h, h_channels_[l], skip, skip_channels_[l], v_,
                                        ctx.tape.cols(h));
            }
            h = ctx.tape.leaky_relu(layers_[l].forward(ctx, input), slope);
        }
        return h;
    }

    std::vector<Param*> params() {
        std::vector<Param*> ps;
        for (auto& l : layers_) detail::append(ps, l.params());
        return ps;
    }

private:
    int v_;
    bool with_skips_;
    std::vector<int> h_channels_, skip_channels_;
    std::vector<Deconv1d> layers_;
};

/// The imputation generator body: graph attention, temporal self-attention,
/// and a temporal-convolution U-Net with skip connections, closed by a
/// second graph stage under tanh. Maps V x T to V x T in (-1, 1).
class GtaUNet {
public:
    GtaUNet(const GtanConfig& cfg, const Graph& graph, Rng& rng)
        : cfg_(cfg), graph_(&graph),
          stage_in_("gi.gat_in", cfg, graph, 1, 1, cfg.t_total, rng),
          stage_out_("gi.gat_out", cfg, graph, cfg.has_temporal() ? 2 : 1, 1, cfg.t_total, rng) {
        cfg.validate(graph.node_count());
        if (cfg.has_self_attention())
            mhsa_.emplace("gi.mhsa", graph.node_count(), cfg.t_total, cfg.heads,
                          cfg.resolved_head_dim(graph.node_count()), rng);
        if (cfg.has_temporal()) {
            contract_.emplace("gi", cfg, graph.node_count(), rng);
            expand_.emplace("gi", cfg, graph.node_count(), /*with_skips=*/true, rng);
        }
    }

    /// x: V x T input (observed entries plus noise carriers, scaled space).
    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        const int v = graph_->node_count();
        if (tp.rows(x) != v || tp.cols(x) != cfg_.t_total)
            throw std::invalid_argument("gta-unet: input must be V x T");
        const int y1 = stage_in_.forward(ctx, x);
        int h = stage_in_.is_identity() ? y1 : tp.leaky_relu(y1, cfg_.leaky_slope);
        if (mhsa_) h = tp.leaky_relu(mhsa_->forward(ctx, h), cfg_.leaky_slope);
        int y2 = h;
        if (cfg_.has_temporal()) {
            const auto skips = contract_->forward(ctx, h, cfg_.leaky_slope);
            const int bottom = skips.back();
            const int expanded = expand_->forward(ctx, bottom, skips, cfg_.leaky_slope);
            // outermost skip: the first graph stage's output joins the final map
            y2 = concat_channels(tp, expanded, 1, y1, 1, v, cfg_.t_total);
        }
        return tp.tanh_(stage_out_.forward(ctx, y2));
    }

    std::vector<Param*> params() {
        std::vector<Param*> ps = stage_in_.params();
        if (mhsa_) detail::append(ps, mhsa_->params());
        if (contract_) detail::append(ps, contract_->params());
        if (expand_) detail::append(ps, expand_->params());
        detail::append(ps, stage_out_.params());
        return ps;
    }

    const GtanConfig& config() const { return cfg_; }
    const Graph& graph() const { return *graph_; }
    MultiHeadSelfAttention* mhsa() { return mhsa_ ? &*mhsa_ : nullptr; }
    GatLayer* input_gat() { return stage_in_.gat(); }

private:
    GtanConfig cfg_;
    const Graph* graph_;
    detail::GraphStage stage_in_;
    std::optional<MultiHeadSelfAttention> mhsa_;
    std::optional<TConvContract> contract_;
    std::optional<TConvExpand> expand_;
    detail::GraphStage stage_out_;
};

/// Mask generator: noise -> fully connected reshape -> expansive temporal
/// convolutions (no skips) -> graph stage -> sigmoid, so outputs live in
/// [0, 1] with shape V x T.
class MaskGenerator {
public:
    MaskGenerator(const GtanConfig& cfg, const Graph& graph, Rng& rng)
        : cfg_(cfg), graph_(&graph),
          fc_("gm.fc", cfg.noise_dim,
              graph.node_count() * (cfg.has_temporal() ? cfg.t_total >> cfg.tconv_depth
                                                       : cfg.t_total),
              rng),
          stage_out_("gm.gat", cfg, graph, 1, 1, cfg.t_total, rng) {
        cfg.validate(graph.node_count());
        if (cfg.has_temporal())
            expand_.emplace("gm", cfg, graph.node_count(), /*with_skips=*/false, rng);
    }

    /// omega: 1 x noise_dim standard-normal noise.
    int forward(Ctx& ctx, int omega) {
        Tape& tp = ctx.tape;
        if (tp.rows(omega) != 1 || tp.cols(omega) != cfg_.noise_dim)
            throw std::invalid_argument("mask generator: omega must be 1 x noise_dim");
        const int v = graph_->node_count();
        const int seed_len = cfg_.has_temporal() ? cfg_.t_total >> cfg_.tconv_depth : cfg_.t_total;
        int h = tp.leaky_relu(fc_.forward(ctx, omega), cfg_.leaky_slope);
        h = tp.reshape(h, v, seed_len);
        if (expand_) h = expand_->forward(ctx, h, {}, cfg_.leaky_slope);
        return tp.sigmoid_(stage_out_.forward(ctx, h));
    }

    std::vector<Param*> params() {
        std::vector<Param*> ps = fc_.params();
        if (expand_) detail::append(ps, expand_->params());
        detail::append(ps, stage_out_.params());
        return ps;
    }

    const GtanConfig& config() const { return cfg_; }

private:
    GtanConfig cfg_;
    const Graph* graph_;
    Dense fc_;
    std::optional<TConvExpand> expand_;
    detail::GraphStage stage_out_;
};

/// Critic shared by the mask and imputation discriminators: graph stage,
/// self-attention, contracting temporal convolutions, then a fully
/// connected reduction to one scalar.
class Discriminator {
public:
    Discriminator(const std::string& name, const GtanConfig& cfg, const Graph& graph, Rng& rng)
        : cfg_(cfg), graph_(&graph), stage_in_(name + ".gat", cfg, graph, 1, 1, cfg.t_total, rng) {
        cfg.validate(graph.node_count());
        const int v = graph.node_count();
        int flat = v * cfg.t_total;
        if (cfg.has_self_attention())
            mhsa_.emplace(name + ".mhsa", v, cfg.t_total, cfg.heads, cfg.resolved_head_dim(v),
                          rng);
        if (cfg.has_temporal()) {
            contract_.emplace(name, cfg, v, rng);
            const int bottom_c = cfg.base_channels << (cfg.tconv_depth - 1);
            flat = v * bottom_c * (cfg.t_total >> cfg.tconv_depth);
        }
        fc_.emplace(name + ".fc", flat, 1, rng);
    }

    int forward(Ctx& ctx, int x) {
        Tape& tp = ctx.tape;
        const int v = graph_->node_count();
        if (tp.rows(x) != v || tp.cols(x) != cfg_.t_total)
            throw std::invalid_argument("discriminator: input must be V x T");
        const int y1 = stage_in_.forward(ctx, x);
        int h = stage_in_.is_identity() ? y1 : tp.leaky_relu(y1, cfg_.leaky_slope);
        if (mhsa_) h = tp.leaky_relu(mhsa_->forward(ctx, h), cfg_.leaky_slope);
        if (contract_) h = contract_->forward(ctx, h, cfg_.leaky_slope).back();
        const int flat = tp.reshape(h, 1, tp.count(h));
        return fc_->forward(ctx, flat);  // 1 x 1 critic score
    }

    std::vector<Param*> params() {
        std::vector<Param*> ps = stage_in_.params();
        if (mhsa_) detail::append(ps, mhsa_->params());
        if (contract_) detail::append(ps, contract_->params());
        detail::append(ps, fc_->params());
        return ps;
    }

private:
    GtanConfig cfg_;
    const Graph* graph_;
    detail::GraphStage stage_in_;
    std::optional<MultiHeadSelfAttention> mhsa_;
    std::optional<TConvContract> contract_;
    std::optional<Dense> fc_;
};

/// The four networks of the adversarial imputation model.
struct Networks {
    std::unique_ptr<GtaUNet> imputer;          // \hat{G}_i
    std::unique_ptr<MaskGenerator> mask_gen;   // G_m
    std::unique_ptr<Discriminator> disc_imp;   // D_i
    std::unique_ptr<Discriminator> disc_mask;  // D_m
};

inline Networks build_variant(const GtanConfig& cfg, const Graph& graph, Rng& rng) {
    cfg.validate(graph.node_count());
    Networks nets;
    nets.imputer = std::make_unique<GtaUNet>(cfg, graph, rng);
    nets.mask_gen = std::make_unique<MaskGenerator>(cfg, graph, rng);
    nets.disc_imp = std::make_unique<Discriminator>("di", cfg, graph, rng);
    nets.disc_mask = std::make_unique<Discriminator>("dm", cfg, graph, rng);
    return nets;
}

/// Thresholds a soft mask at 0.5 into a binary one.
inline Eigen::MatrixXd harden(const Eigen::MatrixXd& soft) {
    Eigen::MatrixXd out(soft.rows(), soft.cols());
    for (Eigen::Index i = 0; i < soft.rows(); ++i)
        for (Eigen::Index j = 0; j < soft.cols(); ++j) out(i, j) = soft(i, j) >= 0.5 ? 1.0 : 0.0;
    return out;
}

}  // namespace netsimp::nn

#endif  // NETSIMP_NN_NETWORKS_HPP
