#ifndef NETSIMP_MISSINGNESS_HPP
#define NETSIMP_MISSINGNESS_HPP

#include <Eigen/Core>
#include <cmath>
#include <deque>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsimp/dataset.hpp"
#include "netsimp/graph.hpp"
#include "netsimp/mask.hpp"
#include "netsimp/rng.hpp"

namespace netsimp {

enum class MissingKind { Random, SFBlock, SVBlock, MVBlock };

inline MissingKind missing_kind_from_string(const std::string& s) {
    if (s == "random") return MissingKind::Random;
    if (s == "sf-block") return MissingKind::SFBlock;
    if (s == "sv-block") return MissingKind::SVBlock;
    if (s == "mv-block") return MissingKind::MVBlock;
    throw std::invalid_argument("unknown missing pattern '" + s + "'");
}

inline std::string to_string(MissingKind k) {
    switch (k) {
        case MissingKind::Random: return "random";
        case MissingKind::SFBlock: return "sf-block";
        case MissingKind::SVBlock: return "sv-block";
        case MissingKind::MVBlock: return "mv-block";
    }
    return "?";
}

/// Node-range and time-range bounds for variable-shape blocks.
struct BlockBounds {
    int lo_nodes = 0, hi_nodes = 0, lo_steps = 0, hi_steps = 0;

    /// SV-Block paper defaults: [V/4, 3V/4] x [T/4, 3T/4].
    static BlockBounds sv_defaults(int v, int t) {
        return {v / 4, 3 * v / 4, t / 4, 3 * t / 4};
    }
    /// MV-Block paper defaults: [1, 7] x [1, 3].
    static BlockBounds mv_defaults() { return {1, 7, 1, 3}; }

    void validate(int v, int t) const {
        if (lo_nodes < 0 || lo_nodes > hi_nodes || hi_nodes > v)
            throw std::invalid_argument("block bounds: need 0 <= l_v <= u_v <= V");
        if (lo_steps < 0 || lo_steps > hi_steps || hi_steps > t)
            throw std::invalid_argument("block bounds: need 0 <= l_t <= u_t <= T");
    }
};

struct MissingPattern {
    MissingKind kind = MissingKind::Random;
    double rate = 0.25;
    BlockBounds bounds;       // SV/MV only; zeroed bounds mean "use defaults"
    std::uint64_t seed = 0;

    bool bounds_given() const {
        return bounds.lo_nodes || bounds.hi_nodes || bounds.lo_steps || bounds.hi_steps;
    }
};

namespace detail {

/// Breadth-first traversal from a random root, neighbors in ascending node
/// index. If a component is exhausted before the quota is met, traversal
/// restarts from a fresh uniformly random unvisited node.
inline std::vector<int> bfs_node_block(const Graph& graph, int quota, Rng& rng) {
    const int v_count = graph.node_count();
    std::vector<bool> visited(static_cast<size_t>(v_count), false);
    std::vector<int> picked;
    picked.reserve(static_cast<size_t>(quota));
    std::deque<int> frontier;
    while (static_cast<int>(picked.size()) < quota) {
        if (frontier.empty()) {
            std::vector<int> unvisited;
            for (int v = 0; v < v_count; ++v)
                if (!visited[static_cast<size_t>(v)]) unvisited.push_back(v);
            const int root =
                unvisited[static_cast<size_t>(rng.next_int(0, static_cast<int>(unvisited.size()) - 1))];
            visited[static_cast<size_t>(root)] = true;
            frontier.push_back(root);
        }
        const int v = frontier.front();
        frontier.pop_front();
        picked.push_back(v);
        for (int nbr : graph.neighbors(v))
            if (!visited[static_cast<size_t>(nbr)]) {
                visited[static_cast<size_t>(nbr)] = true;
                frontier.push_back(nbr);
            }
    }
    return picked;
}

inline void carve_block(Eigen::MatrixXd& mask, const Graph& graph, int n_nodes, int n_steps,
                        int t_total, Rng& rng) {
    if (n_nodes <= 0 || n_steps <= 0) return;
    const auto nodes = bfs_node_block(graph, n_nodes, rng);
    const int start = static_cast<int>(rng.next_int(0, t_total - n_steps));
    for (int v : nodes)
        for (int t = start; t < start + n_steps; ++t) mask(v, t) = 0.0;
}

}  // namespace detail

/// Every entry missing independently with probability r.
inline Eigen::MatrixXd gen_random_mask(int v_count, int t_total, double rate, Rng& rng) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("random mask: rate outside [0,1]");
    Eigen::MatrixXd m(v_count, t_total);
    for (int v = 0; v < v_count; ++v)
        for (int t = 0; t < t_total; ++t) m(v, t) = rng.next_bernoulli(rate) ? 0.0 : 1.0;
    return m;
}

/// Single fixed-shape block: floor(V*sqrt(r)) BFS-contiguous nodes over
/// floor(T*sqrt(r)) consecutive timestamps.
inline Eigen::MatrixXd gen_sf_block_mask(const Graph& graph, int t_total, double rate, Rng& rng) {
    if (rate <= 0.0 || rate > 1.0) throw std::invalid_argument("sf-block: rate outside (0,1]");
    const int n_nodes = static_cast<int>(std::floor(graph.node_count() * std::sqrt(rate)));
    const int n_steps = static_cast<int>(std::floor(t_total * std::sqrt(rate)));
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(graph.node_count(), t_total);
    detail::carve_block(m, graph, n_nodes, n_steps, t_total, rng);
    return m;
}

/// Single variable-shape block: N_v ~ U[l_v,u_v] nodes x N_t ~ U[l_t,u_t]
/// consecutive timestamps.
inline Eigen::MatrixXd gen_sv_block_mask(const Graph& graph, int t_total, BlockBounds bounds,
                                         Rng& rng) {
    bounds.validate(graph.node_count(), t_total);
    const int n_nodes = static_cast<int>(rng.next_int(bounds.lo_nodes, bounds.hi_nodes));
    const int n_steps = static_cast<int>(rng.next_int(bounds.lo_steps, bounds.hi_steps));
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(graph.node_count(), t_total);
    detail::carve_block(m, graph, n_nodes, n_steps, t_total, rng);
    return m;
}

/// Number of MV blocks: floor(V*T*r / ((l_v+u_v)(l_t+u_t)/4)), i.e. the
/// target missing count divided by the expected block area.
inline int mv_block_count(int v_count, int t_total, double rate, const BlockBounds& bounds) {
    const double mean_area =
        (bounds.lo_nodes + bounds.hi_nodes) * (bounds.lo_steps + bounds.hi_steps) / 4.0;
    if (mean_area <= 0.0) throw std::invalid_argument("mv-block: degenerate bounds");
    return static_cast<int>(std::floor(v_count * t_total * rate / mean_area));
}

/// Multiple variable-shape blocks drawn independently; overlap allowed, so
/// the realized rate may fall below r.
inline Eigen::MatrixXd gen_mv_block_mask(const Graph& graph, int t_total, double rate,
                                         BlockBounds bounds, Rng& rng) {
    if (rate <= 0.0 || rate > 1.0) throw std::invalid_argument("mv-block: rate outside (0,1]");
    bounds.validate(graph.node_count(), t_total);
    const int blocks = mv_block_count(graph.node_count(), t_total, rate, bounds);
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(graph.node_count(), t_total);
    if (blocks == 0) {
        std::cerr << "warning: mv-block rate " << rate << " yields 0 blocks; mask left complete\n";
        return m;
    }
    for (int b = 0; b < blocks; ++b) {
        const int n_nodes = static_cast<int>(rng.next_int(bounds.lo_nodes, bounds.hi_nodes));
        const int n_steps = static_cast<int>(rng.next_int(bounds.lo_steps, bounds.hi_steps));
        detail::carve_block(m, graph, n_nodes, n_steps, t_total, rng);
    }
    return m;
}

/// One pattern draw confined to a segment of t_total timestamps.
inline Eigen::MatrixXd gen_segment_mask(const Graph& graph, int t_segment,
                                        const MissingPattern& pattern, Rng& rng) {
    switch (pattern.kind) {
        case MissingKind::Random:
            return gen_random_mask(graph.node_count(), t_segment, pattern.rate, rng);
        case MissingKind::SFBlock:
            return gen_sf_block_mask(graph, t_segment, pattern.rate, rng);
        case MissingKind::SVBlock: {
            const BlockBounds b = pattern.bounds_given()
                                      ? pattern.bounds
                                      : BlockBounds::sv_defaults(graph.node_count(), t_segment);
            return gen_sv_block_mask(graph, t_segment, b, rng);
        }
        case MissingKind::MVBlock: {
            const BlockBounds b =
                pattern.bounds_given() ? pattern.bounds : BlockBounds::mv_defaults();
            return gen_mv_block_mask(graph, t_segment, pattern.rate, b, rng);
        }
    }
    throw std::logic_error("unreachable");
}

/// Masks a complete dataset: every sample gets one independent pattern draw
/// on its history columns and one on its future columns. Values are left in
/// place; callers keep the complete data as evaluation ground truth.
inline NetsDataset mask_dataset(const NetsDataset& dataset, const MissingPattern& pattern) {
    if (!dataset.complete())
        throw std::invalid_argument("mask_dataset: input dataset already has missing entries");
    if (pattern.bounds_given()) {
        const int th = dataset.layout.t_history;
        const int tf = dataset.layout.t_total - th;
        if ((pattern.kind == MissingKind::SVBlock || pattern.kind == MissingKind::MVBlock) &&
            (pattern.bounds.hi_steps > th || pattern.bounds.hi_steps > tf))
            throw std::invalid_argument("mask_dataset: block time bounds exceed a segment length");
    }
    NetsDataset out;
    out.graph = dataset.graph;
    out.split = dataset.split;
    out.layout = dataset.layout;
    out.samples.reserve(dataset.samples.size());
    Rng base(pattern.seed);
    for (size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        const int th = s.mask.t_history();
        const int tf = s.mask.t_future();
        Rng rng_h = base.fork(2 * i);
        Rng rng_f = base.fork(2 * i + 1);
        Eigen::MatrixXd m(s.nodes(), s.t_total());
        m.leftCols(th) = gen_segment_mask(*dataset.graph, th, pattern, rng_h);
        m.rightCols(tf) = gen_segment_mask(*dataset.graph, tf, pattern, rng_f);
        out.samples.emplace_back(s.graph, s.values, Mask(std::move(m), th));
    }
    return out;
}

}  // namespace netsimp

#endif  // NETSIMP_MISSINGNESS_HPP
