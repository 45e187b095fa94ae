#ifndef NETSIMP_SCALER_HPP
#define NETSIMP_SCALER_HPP

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsimp/dataset.hpp"

namespace netsimp {

/// Per-node min-max scaling to [-1, 1], fitted on observed entries of the
/// training split only. A node whose training range collapses (max == min)
/// scales to 0 and unscales back to the constant.
class NodeScaler {
public:
    NodeScaler(std::vector<double> mins, std::vector<double> maxs)
        : mins_(std::move(mins)), maxs_(std::move(maxs)) {
        if (mins_.size() != maxs_.size()) throw std::invalid_argument("scaler: size mismatch");
        for (size_t v = 0; v < mins_.size(); ++v)
            if (mins_[v] > maxs_[v]) throw std::invalid_argument("scaler: min > max");
    }

    static NodeScaler fit(const NetsDataset& ds) {
        const int v_count = ds.nodes();
        std::vector<double> mins(static_cast<size_t>(v_count),
                                 std::numeric_limits<double>::infinity());
        std::vector<double> maxs(static_cast<size_t>(v_count),
                                 -std::numeric_limits<double>::infinity());
        std::vector<bool> seen(static_cast<size_t>(v_count), false);
        for (int idx : ds.split.train) {
            const auto& s = ds.samples[static_cast<size_t>(idx)];
            for (int v = 0; v < v_count; ++v)
                for (int t = 0; t < s.t_total(); ++t)
                    if (s.mask.observed(v, t)) {
                        const double x = s.values(v, t);
                        mins[static_cast<size_t>(v)] = std::min(mins[static_cast<size_t>(v)], x);
                        maxs[static_cast<size_t>(v)] = std::max(maxs[static_cast<size_t>(v)], x);
                        seen[static_cast<size_t>(v)] = true;
                    }
        }
        for (int v = 0; v < v_count; ++v)
            if (!seen[static_cast<size_t>(v)])
                throw std::runtime_error("scaler: node " + std::to_string(v) +
                                         " has no observed training entry");
        return NodeScaler(std::move(mins), std::move(maxs));
    }

    int nodes() const { return static_cast<int>(mins_.size()); }
    double node_min(int v) const { return mins_[static_cast<size_t>(v)]; }
    double node_max(int v) const { return maxs_[static_cast<size_t>(v)]; }

    double scale_value(int v, double x) const {
        const double lo = mins_[static_cast<size_t>(v)], hi = maxs_[static_cast<size_t>(v)];
        if (hi == lo) return 0.0;
        return 2.0 * (x - lo) / (hi - lo) - 1.0;
    }

    double unscale_value(int v, double y) const {
        const double lo = mins_[static_cast<size_t>(v)], hi = maxs_[static_cast<size_t>(v)];
        if (hi == lo) return lo;
        return lo + (y + 1.0) * 0.5 * (hi - lo);
    }

    Eigen::MatrixXd scale(const Eigen::MatrixXd& values) const {
        return map(values, [this](int v, double x) { return scale_value(v, x); });
    }

    Eigen::MatrixXd unscale(const Eigen::MatrixXd& values) const {
        return map(values, [this](int v, double x) { return unscale_value(v, x); });
    }

    NetsSample scale(const NetsSample& s) const {
        return NetsSample(s.graph, scale(s.values), s.mask);
    }

    NetsSample unscale(const NetsSample& s) const {
        return NetsSample(s.graph, unscale(s.values), s.mask);
    }

private:
    template <typename F>
    Eigen::MatrixXd map(const Eigen::MatrixXd& values, F f) const {
        if (values.rows() != nodes()) throw std::invalid_argument("scaler: node count mismatch");
        Eigen::MatrixXd out(values.rows(), values.cols());
        for (Eigen::Index v = 0; v < values.rows(); ++v)
            for (Eigen::Index t = 0; t < values.cols(); ++t)
                out(v, t) = f(static_cast<int>(v), values(v, t));
        return out;
    }

    std::vector<double> mins_, maxs_;
};

}  // namespace netsimp

#endif  // NETSIMP_SCALER_HPP
