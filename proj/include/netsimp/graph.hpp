#ifndef NETSIMP_GRAPH_HPP
#define NETSIMP_GRAPH_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netsimp {

/// Undirected graph over nodes 0..V-1. Immutable after construction.
/// Static edge weights are optional; only the no-attention model variant
/// reads them.
class Graph {
public:
    using Edge = std::pair<int, int>;  // stored with first < second

    Graph(int node_count, std::vector<Edge> edges,
          std::map<Edge, double> edge_weights = {})
        : node_count_(node_count), adjacency_(static_cast<size_t>(node_count)) {
        if (node_count <= 0) throw std::invalid_argument("graph: node_count must be positive");
        for (auto& e : edges) {
            if (e.first == e.second)
                throw std::invalid_argument("graph: self-loop at node " + std::to_string(e.first));
            if (e.first < 0 || e.second < 0 || e.first >= node_count || e.second >= node_count)
                throw std::invalid_argument("graph: edge (" + std::to_string(e.first) + "," +
                                            std::to_string(e.second) + ") out of range");
            if (e.first > e.second) std::swap(e.first, e.second);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges_ = std::move(edges);
        for (const auto& e : edges_) {
            adjacency_[static_cast<size_t>(e.first)].push_back(e.second);
            adjacency_[static_cast<size_t>(e.second)].push_back(e.first);
        }
        for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
        for (auto& [edge, w] : edge_weights) {
            Edge key = edge.first <= edge.second ? edge : Edge{edge.second, edge.first};
            if (w <= 0.0) throw std::invalid_argument("graph: edge weight must be positive");
            if (!std::binary_search(edges_.begin(), edges_.end(), key))
                throw std::invalid_argument("graph: weight for nonexistent edge");
            weights_[key] = w;
        }
    }

    int node_count() const { return node_count_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Neighbors in ascending node index.
    const std::vector<int>& neighbors(int v) const { return adjacency_[static_cast<size_t>(v)]; }

    int max_degree() const {
        size_t d = 0;
        for (const auto& nbrs : adjacency_) d = std::max(d, nbrs.size());
        return static_cast<int>(d);
    }

    bool has_weights() const { return !weights_.empty(); }

    /// Weight of edge (i,j); 1.0 when no static weights were supplied.
    double weight(int i, int j) const {
        if (weights_.empty()) return 1.0;
        Edge key = i <= j ? Edge{i, j} : Edge{j, i};
        auto it = weights_.find(key);
        return it == weights_.end() ? 1.0 : it->second;
    }

    /// Relabels nodes: node v becomes perm[v]. Used by equivariance checks.
    Graph permuted(const std::vector<int>& perm) const {
        std::vector<Edge> edges;
        edges.reserve(edges_.size());
        std::map<Edge, double> wts;
        for (const auto& e : edges_) {
            Edge p{perm[static_cast<size_t>(e.first)], perm[static_cast<size_t>(e.second)]};
            if (p.first > p.second) std::swap(p.first, p.second);
            if (!weights_.empty()) wts[p] = weight(e.first, e.second);
            edges.push_back(p);
        }
        return Graph(node_count_, std::move(edges), std::move(wts));
    }

private:
    int node_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::map<Edge, double> weights_;
};

}  // namespace netsimp

#endif  // NETSIMP_GRAPH_HPP
