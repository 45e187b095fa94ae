#ifndef NETSIMP_DATASET_HPP
#define NETSIMP_DATASET_HPP

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "netsimp/graph.hpp"
#include "netsimp/mask.hpp"

namespace netsimp {

/// One networked-time-series sample: V x T values plus the observation mask.
/// Entries with mask = 0 are carriers that no consumer may read; by
/// convention they hold 0 in storage.
struct NetsSample {
    std::shared_ptr<const Graph> graph;
    Eigen::MatrixXd values;  // V x T
    Mask mask;

    NetsSample(std::shared_ptr<const Graph> g, Eigen::MatrixXd vals, Mask m)
        : graph(std::move(g)), values(std::move(vals)), mask(std::move(m)) {
        if (!graph) throw std::invalid_argument("sample: null graph");
        if (values.rows() != graph->node_count() || values.cols() != mask.t_total() ||
            mask.nodes() != graph->node_count())
            throw std::invalid_argument("sample: value/mask/graph shape mismatch");
        for (Eigen::Index v = 0; v < values.rows(); ++v)
            for (Eigen::Index t = 0; t < values.cols(); ++t)
                if (mask.observed(static_cast<int>(v), static_cast<int>(t)) &&
                    !std::isfinite(values(v, t)))
                    throw std::invalid_argument("sample: observed entry is not finite");
    }

    int nodes() const { return static_cast<int>(values.rows()); }
    int t_total() const { return static_cast<int>(values.cols()); }
};

struct Split {
    std::vector<int> train, validation, test;
};

/// How a raw series is cut into fixed-length samples.
struct LayoutSpec {
    int t_total = 16;
    int t_history = 8;
    int window_stride = 16;
    double split_train = 0.90;
    double split_validation = 0.05;

    void validate() const {
        if (t_total < 2 || t_history < 1 || t_history >= t_total)
            throw std::invalid_argument("layout: need 1 <= t_history < t_total");
        if (window_stride < 1) throw std::invalid_argument("layout: stride must be positive");
        if (split_train < 0 || split_validation < 0 || split_train + split_validation > 1.0)
            throw std::invalid_argument("layout: invalid split fractions");
    }
};

/// Ordered samples over one shared graph, with a contiguous-by-index
/// train/validation/test partition.
struct NetsDataset {
    std::shared_ptr<const Graph> graph;
    std::vector<NetsSample> samples;
    Split split;
    LayoutSpec layout;

    int nodes() const { return graph->node_count(); }
    size_t size() const { return samples.size(); }

    bool complete() const {
        for (const auto& s : samples)
            if (s.mask.missing_count() != 0) return false;
        return true;
    }
};

/// Contiguous split by sample index: the leading fraction trains, then
/// validation, then test. Keeps the temporal order intact so later windows
/// never leak into training.
inline Split contiguous_split(int n, double train_frac, double val_frac) {
    const int n_train = static_cast<int>(std::floor(n * train_frac));
    const int n_val = static_cast<int>(std::floor(n * val_frac));
    Split s;
    for (int i = 0; i < n_train; ++i) s.train.push_back(i);
    for (int i = n_train; i < n_train + n_val; ++i) s.validation.push_back(i);
    for (int i = n_train + n_val; i < n; ++i) s.test.push_back(i);
    return s;
}

/// Cuts a raw V x T_raw series (and matching mask) into windows of
/// layout.t_total at the given stride. floor((T_raw - t_total)/stride) + 1
/// windows; a series shorter than one window is an error.
inline NetsDataset window_series(std::shared_ptr<const Graph> graph,
                                 const Eigen::MatrixXd& series, const Eigen::MatrixXd& raw_mask,
                                 const LayoutSpec& layout) {
    layout.validate();
    if (series.rows() != graph->node_count())
        throw std::invalid_argument("windowing: series row count != graph node count");
    if (raw_mask.rows() != series.rows() || raw_mask.cols() != series.cols())
        throw std::invalid_argument("windowing: mask shape != series shape");
    const int t_raw = static_cast<int>(series.cols());
    if (t_raw < layout.t_total)
        throw std::invalid_argument("windowing: series shorter than one window");
    const int n = (t_raw - layout.t_total) / layout.window_stride + 1;

    NetsDataset ds;
    ds.graph = graph;
    ds.layout = layout;
    ds.samples.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int start = i * layout.window_stride;
        Eigen::MatrixXd vals = series.middleCols(start, layout.t_total);
        Mask m(raw_mask.middleCols(start, layout.t_total), layout.t_history);
        ds.samples.emplace_back(graph, std::move(vals), std::move(m));
    }
    ds.split = contiguous_split(n, layout.split_train, layout.split_validation);
    return ds;
}

/// Inverse of non-overlapping windowing: concatenates the samples back
/// into one series/mask pair along time.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> concat_samples(const NetsDataset& ds) {
    if (ds.samples.empty()) throw std::invalid_argument("concat: empty dataset");
    const int v = ds.nodes();
    const int t = ds.samples.front().t_total();
    Eigen::MatrixXd series(v, t * static_cast<int>(ds.samples.size()));
    Eigen::MatrixXd mask(v, series.cols());
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        series.middleCols(static_cast<int>(i) * t, t) = ds.samples[i].values;
        mask.middleCols(static_cast<int>(i) * t, t) = ds.samples[i].mask.values();
    }
    return {series, mask};
}

}  // namespace netsimp

#endif  // NETSIMP_DATASET_HPP
