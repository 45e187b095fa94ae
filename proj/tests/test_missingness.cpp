#include <gtest/gtest.h>

#include <set>

#include "netsimp/missingness.hpp"

using namespace netsimp;

namespace {

std::shared_ptr<const Graph> ring_graph(int v) {
    std::vector<Graph::Edge> edges;
    for (int i = 0; i < v; ++i) edges.push_back({i, (i + 1) % v});
    return std::make_shared<const Graph>(v, edges);
}

std::shared_ptr<const Graph> path_graph(int v) {
    std::vector<Graph::Edge> edges;
    for (int i = 0; i + 1 < v; ++i) edges.push_back({i, i + 1});
    return std::make_shared<const Graph>(v, edges);
}

int missing_count(const Eigen::MatrixXd& m) {
    return static_cast<int>(m.size()) - static_cast<int>(m.sum());
}

// Missing timestamps of each affected node form one contiguous run.
void expect_contiguous_runs(const Eigen::MatrixXd& m) {
    for (Eigen::Index v = 0; v < m.rows(); ++v) {
        int transitions = 0;
        for (Eigen::Index t = 1; t < m.cols(); ++t)
            if (m(v, t) != m(v, t - 1)) ++transitions;
        if (m.row(v).minCoeff() == 0.0 && m.row(v).sum() > 0.0) EXPECT_LE(transitions, 2);
    }
}

void expect_connected_missing_nodes(const Eigen::MatrixXd& m, const Graph& g) {
    std::set<int> missing;
    for (Eigen::Index v = 0; v < m.rows(); ++v)
        if (m.row(v).minCoeff() == 0.0) missing.insert(static_cast<int>(v));
    if (missing.size() <= 1) return;
    std::set<int> seen{*missing.begin()};
    std::vector<int> frontier{*missing.begin()};
    while (!frontier.empty()) {
        const int v = frontier.back();
        frontier.pop_back();
        for (int n : g.neighbors(v))
            if (missing.count(n) && !seen.count(n)) {
                seen.insert(n);
                frontier.push_back(n);
            }
    }
    EXPECT_EQ(seen.size(), missing.size());
}

}  // namespace

TEST(RandomMask, RateZeroAndOne) {
    Rng rng(1);
    EXPECT_EQ(missing_count(gen_random_mask(5, 7, 0.0, rng)), 0);
    EXPECT_EQ(missing_count(gen_random_mask(5, 7, 1.0, rng)), 35);
}

TEST(RandomMask, BinomialBand) {
    Rng rng(42);
    Eigen::MatrixXd m = gen_random_mask(81, 16, 0.25, rng);
    const double rate = static_cast<double>(missing_count(m)) / m.size();
    const double sigma = std::sqrt(0.25 * 0.75 / m.size());
    EXPECT_NEAR(rate, 0.25, 3.0 * sigma);
}

TEST(SfBlock, ExactCountAtQuarter) {
    auto g = ring_graph(81);
    Rng rng(7);
    Eigen::MatrixXd m = gen_sf_block_mask(*g, 16, 0.25, rng);
    EXPECT_EQ(missing_count(m), 40 * 8);  // floor(81*0.5) * floor(16*0.5)
    expect_contiguous_runs(m);
    expect_connected_missing_nodes(m, *g);
}

TEST(SfBlock, FullRateMissesEverything) {
    auto g = ring_graph(6);
    Rng rng(3);
    EXPECT_EQ(missing_count(gen_sf_block_mask(*g, 8, 1.0, rng)), 48);
}

TEST(SfBlock, BfsPrefixOnPath) {
    // path 0-1-2-3: from root 0 the 2-node BFS prefix is {0, 1}.
    auto g = path_graph(4);
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        Rng rng(seed);
        // quota 2 of 4 nodes => r = 0.25; timestamps quota 1 of 2 => pick T=2, r=0.25 -> 1 step
        Eigen::MatrixXd m = gen_sf_block_mask(*g, 2, 0.25, rng);
        std::set<int> missing;
        for (int v = 0; v < 4; ++v)
            if (m.row(v).minCoeff() == 0.0) missing.insert(v);
        ASSERT_EQ(missing.size(), 2u);
        if (missing.count(0)) EXPECT_TRUE(missing.count(1));   // N(0) = {1}
        if (missing.count(3)) EXPECT_TRUE(missing.count(2));   // N(3) = {2}
    }
}

TEST(SfBlock, RestartsAcrossComponents) {
    // two disconnected edges; quota forces a restart
    auto g = std::make_shared<const Graph>(4, std::vector<Graph::Edge>{{0, 1}, {2, 3}});
    Rng rng(9);
    Eigen::MatrixXd m = gen_sf_block_mask(*g, 4, 9.0 / 16.0, rng);  // 3 nodes x 3 steps
    EXPECT_EQ(missing_count(m), 9);
}

TEST(SvBlock, BoundsRespectedAndProductCount) {
    auto g = ring_graph(16);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd m = gen_sv_block_mask(*g, 16, BlockBounds::sv_defaults(16, 16), rng);
        std::set<int> nodes;
        int steps = 0;
        for (int v = 0; v < 16; ++v)
            if (m.row(v).minCoeff() == 0.0) {
                nodes.insert(v);
                steps = static_cast<int>(16 - m.row(v).sum());
            }
        ASSERT_GE(static_cast<int>(nodes.size()), 4);
        ASSERT_LE(static_cast<int>(nodes.size()), 12);
        ASSERT_GE(steps, 4);
        ASSERT_LE(steps, 12);
        EXPECT_EQ(missing_count(m), static_cast<int>(nodes.size()) * steps);
        expect_connected_missing_nodes(m, *g);
    }
}

TEST(SvBlock, DegenerateBoundsMissEverything) {
    auto g = ring_graph(5);
    Rng rng(2);
    Eigen::MatrixXd m = gen_sv_block_mask(*g, 6, BlockBounds{5, 5, 6, 6}, rng);
    EXPECT_EQ(missing_count(m), 30);
}

TEST(SvBlock, MonteCarloMeanRate) {
    auto g = ring_graph(16);
    Rng rng(123);
    double total = 0.0;
    const int reps = 10000;
    for (int i = 0; i < reps; ++i) {
        Rng r = rng.fork(static_cast<std::uint64_t>(i));
        total += missing_count(gen_sv_block_mask(*g, 16, BlockBounds::sv_defaults(16, 16), r));
    }
    EXPECT_NEAR(total / reps / 256.0, 0.25, 0.01);  // E[N_v]E[N_t]/(VT) = 64/256
}

TEST(MvBlock, BlockCountFormula) {
    EXPECT_EQ(mv_block_count(10, 16, 0.25, BlockBounds::mv_defaults()), 5);
    EXPECT_EQ(mv_block_count(81, 16, 0.25, BlockBounds::mv_defaults()), 40);
}

TEST(MvBlock, ZeroBlocksLeavesComplete) {
    auto g = ring_graph(4);
    Rng rng(5);
    Eigen::MatrixXd m = gen_mv_block_mask(*g, 4, 0.05, BlockBounds::mv_defaults(), rng);
    EXPECT_EQ(missing_count(m), 0);
}

TEST(MvBlock, DisjointUnitBlocksCountExactly) {
    auto g = ring_graph(10);
    BlockBounds unit{1, 1, 1, 1};
    // count = floor(V*T*r / 1) blocks of one entry each; overlaps may reduce
    Rng rng(11);
    Eigen::MatrixXd m = gen_mv_block_mask(*g, 16, 5.0 / 160.0, unit, rng);
    EXPECT_EQ(mv_block_count(10, 16, 5.0 / 160.0, unit), 5);
    EXPECT_LE(missing_count(m), 5);
    EXPECT_GE(missing_count(m), 1);
    bool found_disjoint = false;
    for (std::uint64_t seed = 0; seed < 50 && !found_disjoint; ++seed) {
        Rng r(seed);
        found_disjoint = missing_count(gen_mv_block_mask(*g, 16, 5.0 / 160.0, unit, r)) == 5;
    }
    EXPECT_TRUE(found_disjoint);
}

TEST(MvBlock, ContiguityPerBlockHolds) {
    auto g = ring_graph(12);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd m = gen_mv_block_mask(*g, 16, 0.1, BlockBounds{2, 3, 2, 3}, rng);
        // single block at this rate: floor(12*16*0.1 / (5*5/4)) = floor(3.07) = 3 blocks;
        // runs can merge, so only check each row has missing entries in runs <= blocks
        for (int v = 0; v < 12; ++v) {
            int runs = 0;
            for (int t = 0; t < 16; ++t)
                if (m(v, t) == 0.0 && (t == 0 || m(v, t - 1) == 1.0)) ++runs;
            EXPECT_LE(runs, 3);
        }
    }
}

TEST(Patterns, DeterministicUnderSeed) {
    auto g = ring_graph(9);
    for (auto kind : {MissingKind::Random, MissingKind::SFBlock, MissingKind::SVBlock,
                      MissingKind::MVBlock}) {
        MissingPattern p;
        p.kind = kind;
        p.rate = 0.3;
        p.seed = 77;
        Rng a(5), b(5);
        Eigen::MatrixXd ma = gen_segment_mask(*g, 8, p, a);
        Eigen::MatrixXd mb = gen_segment_mask(*g, 8, p, b);
        EXPECT_TRUE(ma.isApprox(mb)) << to_string(kind);
    }
}

TEST(MaskDataset, RandomRateZeroKeepsDatasetComplete) {
    auto g = ring_graph(4);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(4, 32);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(4, 32), LayoutSpec{});
    MissingPattern p;
    p.kind = MissingKind::Random;
    p.rate = 0.0;
    NetsDataset masked = mask_dataset(ds, p);
    EXPECT_TRUE(masked.complete());
    EXPECT_TRUE(masked.samples[0].values.isApprox(ds.samples[0].values));
}

TEST(MaskDataset, SeededRerunsAreIdentical) {
    auto g = ring_graph(6);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(6, 48);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(6, 48), LayoutSpec{});
    MissingPattern p;
    p.kind = MissingKind::MVBlock;
    p.rate = 0.25;
    p.seed = 99;
    NetsDataset a = mask_dataset(ds, p);
    NetsDataset b = mask_dataset(ds, p);
    for (size_t i = 0; i < a.samples.size(); ++i)
        EXPECT_TRUE(a.samples[i].mask.values().isApprox(b.samples[i].mask.values()));
}

TEST(MaskDataset, SegmentsMaskedIndependently) {
    auto g = ring_graph(8);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(8, 16);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(8, 16), LayoutSpec{});
    MissingPattern p;
    p.kind = MissingKind::SFBlock;
    p.rate = 0.25;
    p.seed = 4;
    NetsDataset masked = mask_dataset(ds, p);
    const auto& m = masked.samples[0].mask;
    // floor(8*sqrt(.25)) = 4 nodes x floor(8*sqrt(.25)) = 4 consecutive steps per segment
    EXPECT_EQ(static_cast<int>(m.values().leftCols(8).size() - m.values().leftCols(8).sum()), 16);
    EXPECT_EQ(static_cast<int>(m.values().rightCols(8).size() - m.values().rightCols(8).sum()),
              16);
    expect_contiguous_runs(m.values().leftCols(8));
    expect_contiguous_runs(m.values().rightCols(8));
}

TEST(MaskDataset, RejectsIncompleteInputAndOversizedBounds) {
    auto g = ring_graph(4);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(4, 16);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(4, 16), LayoutSpec{});
    MissingPattern p;
    p.kind = MissingKind::SVBlock;
    p.bounds = BlockBounds{1, 2, 1, 12};  // exceeds the 8-step segments
    EXPECT_THROW(mask_dataset(ds, p), std::invalid_argument);

    MissingPattern q;
    q.kind = MissingKind::Random;
    q.rate = 0.5;
    NetsDataset masked = mask_dataset(ds, q);
    EXPECT_THROW(mask_dataset(masked, q), std::invalid_argument);
}
