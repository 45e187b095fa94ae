#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "netsimp/csv_io.hpp"
#include "netsimp/dataset.hpp"
#include "netsimp/graph.hpp"
#include "netsimp/mask.hpp"
#include "netsimp/rng.hpp"
#include "netsimp/scaler.hpp"

using namespace netsimp;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const Graph> path_graph(int v) {
    std::vector<Graph::Edge> edges;
    for (int i = 0; i + 1 < v; ++i) edges.push_back({i, i + 1});
    return std::make_shared<const Graph>(v, edges);
}

fs::path temp_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("netsimp_core_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Graph, RejectsSelfLoopsAndBadIndices) {
    EXPECT_THROW(Graph(3, {{1, 1}}), std::invalid_argument);
    EXPECT_THROW(Graph(3, {{0, 3}}), std::invalid_argument);
    EXPECT_THROW(Graph(0, {}), std::invalid_argument);
}

TEST(Graph, DeduplicatesReversedEdges) {
    Graph g(3, {{0, 1}, {1, 0}, {2, 1}});
    EXPECT_EQ(g.edges().size(), 2u);
    EXPECT_EQ(g.neighbors(1), (std::vector<int>{0, 2}));
}

TEST(Mask, ValidatesBinaryEntries) {
    Eigen::MatrixXd m(1, 4);
    m << 1, 0, 1, 0.5;
    EXPECT_THROW(Mask(m, 2), std::invalid_argument);
    m(0, 3) = 1;
    EXPECT_NO_THROW(Mask(m, 2));
    EXPECT_THROW(Mask(Eigen::MatrixXd::Ones(1, 4), 0), std::invalid_argument);
    EXPECT_THROW(Mask(Eigen::MatrixXd::Ones(1, 4), 4), std::invalid_argument);
}

TEST(Mask, ComplementSumsToOnes) {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd m(3, 6);
        for (int v = 0; v < 3; ++v)
            for (int t = 0; t < 6; ++t) m(v, t) = rng.next_bernoulli(0.4) ? 0.0 : 1.0;
        Mask mask(m, 3);
        Eigen::MatrixXd sum = mask.values() + mask.complement();
        EXPECT_TRUE(sum.isApprox(Eigen::MatrixXd::Ones(3, 6)));
    }
}

TEST(PredictionMask, AllOnesInput) {
    Mask m = Mask::ones(2, 2, 2);
    Mask star = make_prediction_mask(m);
    Eigen::MatrixXd expect(2, 4);
    expect << 1, 1, 0, 0, 1, 1, 0, 0;
    EXPECT_TRUE(star.values().isApprox(expect));
    EXPECT_EQ(star.t_history(), 2);
    EXPECT_EQ(star.t_future(), 2);
}

TEST(PredictionMask, AllZerosAbsorbs) {
    Mask m(Eigen::MatrixXd::Zero(3, 4), 2);
    EXPECT_TRUE(make_prediction_mask(m).values().isZero());
}

TEST(PredictionMask, ZeroCountWithOneHistoryHole) {
    const int v = 4, th = 8, tf = 8;
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(v, th + tf);
    m(0, 1) = 0.0;
    Mask star = make_prediction_mask(Mask(m, th));
    EXPECT_EQ(star.missing_count(), v * tf + 1);
    EXPECT_EQ(star.values()(0, 1), 0.0);
}

TEST(PredictionMask, ContainedInOriginal) {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd m(4, 8);
        for (int v = 0; v < 4; ++v)
            for (int t = 0; t < 8; ++t) m(v, t) = rng.next_bernoulli(0.3) ? 0.0 : 1.0;
        Mask mask(m, 4);
        Mask star = make_prediction_mask(mask);
        for (int v = 0; v < 4; ++v)
            for (int t = 0; t < 8; ++t) EXPECT_LE(star.values()(v, t), mask.values()(v, t));
    }
}

TEST(MaskingOperator, IdentityOnAllOnes) {
    Eigen::MatrixXd x(2, 4);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    EXPECT_TRUE(apply_masking_operator(x, Mask::ones(2, 2, 2), 0.0).isApprox(x));
}

TEST(MaskingOperator, AllZerosGivesTau) {
    Eigen::MatrixXd x(2, 4);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    Mask zeros(Eigen::MatrixXd::Zero(2, 4), 2);
    EXPECT_TRUE(apply_masking_operator(x, zeros, 0.0).isZero());
}

TEST(MaskingOperator, SubstitutesTau) {
    Eigen::MatrixXd x(1, 2);
    x << 3, 5;
    Eigen::MatrixXd m(1, 2);
    m << 1, 0;
    Eigen::MatrixXd out = apply_masking_operator(x, Mask(m, 1), -7.0);
    EXPECT_DOUBLE_EQ(out(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(out(0, 1), -7.0);
}

TEST(MaskingOperator, Idempotent) {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd x(3, 4);
        Eigen::MatrixXd m(3, 4);
        for (int v = 0; v < 3; ++v)
            for (int t = 0; t < 4; ++t) {
                x(v, t) = rng.next_gauss();
                m(v, t) = rng.next_bernoulli(0.5) ? 0.0 : 1.0;
            }
        Mask mask(m, 2);
        const double tau = rng.next_gauss();
        Eigen::MatrixXd once = apply_masking_operator(x, mask, tau);
        EXPECT_TRUE(apply_masking_operator(once, mask, tau).isApprox(once));
    }
}

TEST(MaskingOperator, ShapeMismatchThrows) {
    EXPECT_THROW(apply_masking_operator(Eigen::MatrixXd::Zero(2, 3), Mask::ones(2, 2, 2), 0.0),
                 std::invalid_argument);
}

TEST(Scaler, MidpointAndEndpoint) {
    NodeScaler s({0.0}, {100.0});
    EXPECT_DOUBLE_EQ(s.scale_value(0, 50.0), 0.0);
    EXPECT_DOUBLE_EQ(s.scale_value(0, 0.0), -1.0);
    EXPECT_DOUBLE_EQ(s.scale_value(0, 100.0), 1.0);
}

TEST(Scaler, DegenerateRangeScalesToZero) {
    NodeScaler s({2.0}, {2.0});
    EXPECT_DOUBLE_EQ(s.scale_value(0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(s.unscale_value(0, 0.0), 2.0);
}

TEST(Scaler, FitErrorsWhenNodeUnobserved) {
    auto g = path_graph(2);
    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(2, 4);
    mask.row(1).setZero();
    NetsDataset ds;
    ds.graph = g;
    ds.layout = LayoutSpec{4, 2, 4, 1.0, 0.0};
    ds.samples.emplace_back(g, Eigen::MatrixXd::Random(2, 4), Mask(mask, 2));
    ds.split.train = {0};
    EXPECT_THROW(NodeScaler::fit(ds), std::runtime_error);
}

TEST(Scaler, RoundTripRandomMatrices) {
    Rng rng(5);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const double lo = rng.next_gauss() * 10.0;
        const double hi = lo + rng.next_double() * 50.0 + 1e-3;
        NodeScaler s({lo, lo}, {hi, hi});
        Eigen::MatrixXd x(2, 4);
        for (int v = 0; v < 2; ++v)
            for (int t = 0; t < 4; ++t) x(v, t) = lo + rng.next_double() * (hi - lo);
        Eigen::MatrixXd back = s.unscale(s.scale(x));
        for (int v = 0; v < 2; ++v)
            for (int t = 0; t < 4; ++t) {
                const double denom = std::max(std::abs(x(v, t)), 1e-12);
                worst = std::max(worst, std::abs(back(v, t) - x(v, t)) / denom);
            }
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(Windowing, CountsWindows) {
    auto g = path_graph(3);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(3, 32);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(3, 32), LayoutSpec{});
    EXPECT_EQ(ds.samples.size(), 2u);
    EXPECT_TRUE(ds.samples[0].values.isApprox(series.leftCols(16)));
    EXPECT_TRUE(ds.samples[1].values.isApprox(series.rightCols(16)));
}

TEST(Windowing, LosslessReconstruction) {
    auto g = path_graph(2);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(2, 64);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(2, 64), LayoutSpec{});
    auto [back, mask] = concat_samples(ds);
    EXPECT_TRUE(back.isApprox(series));
    EXPECT_TRUE(mask.isApprox(Eigen::MatrixXd::Ones(2, 64)));
}

TEST(Windowing, SplitIsDisjointAndExhaustive) {
    auto g = path_graph(2);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(2, 16 * 100);
    NetsDataset ds = window_series(g, series, Eigen::MatrixXd::Ones(2, series.cols()),
                                   LayoutSpec{});
    EXPECT_EQ(ds.split.train.size(), 90u);
    EXPECT_EQ(ds.split.validation.size(), 5u);
    EXPECT_EQ(ds.split.test.size(), 5u);
    std::vector<int> all;
    for (auto& part : {ds.split.train, ds.split.validation, ds.split.test})
        all.insert(all.end(), part.begin(), part.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 100; ++i) EXPECT_EQ(all[static_cast<size_t>(i)], i);
}

TEST(CsvIo, SeriesRoundTrip) {
    auto dir = temp_dir("series");
    Eigen::MatrixXd series(3, 5);
    series.setRandom();
    save_series_csv((dir / "s.csv").string(), series);
    EXPECT_TRUE(load_series_csv((dir / "s.csv").string()).isApprox(series, 1e-15));
}

TEST(CsvIo, MaskValueTwoIsParseError) {
    auto dir = temp_dir("badmask");
    std::ofstream f(dir / "m.csv");
    f << "node_0,node_1\n0,1\n1,2\n";
    f.close();
    EXPECT_THROW(load_mask_csv((dir / "m.csv").string()), std::runtime_error);
}

TEST(CsvIo, MalformedRowReportsLineNumber) {
    auto dir = temp_dir("badrow");
    std::ofstream f(dir / "s.csv");
    f << "node_0,node_1\n1.0,2.0\n3.0\n";
    f.close();
    try {
        load_series_csv((dir / "s.csv").string());
        FAIL() << "expected parse error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
    }
}

TEST(CsvIo, EmptyEdgeFileGivesIsolatedNodes) {
    auto dir = temp_dir("emptygraph");
    std::ofstream(dir / "g.csv").close();
    auto g = load_graph_csv((dir / "g.csv").string(), 4);
    EXPECT_EQ(g->node_count(), 4);
    EXPECT_TRUE(g->edges().empty());
}

TEST(CsvIo, DatasetDirRoundTrip) {
    auto dir = temp_dir("dsdir");
    auto g = path_graph(3);
    Eigen::MatrixXd series = Eigen::MatrixXd::Random(3, 32);
    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(3, 32);
    mask(1, 3) = 0.0;
    series(1, 3) = 0.0;  // carrier convention in storage
    NetsDataset ds = window_series(g, series, mask, LayoutSpec{});
    save_dataset(ds, dir.string());
    NetsDataset back = load_dataset_dir(dir.string());
    EXPECT_EQ(back.samples.size(), ds.samples.size());
    EXPECT_TRUE(back.samples[0].values.isApprox(ds.samples[0].values, 1e-15));
    EXPECT_TRUE(back.samples[0].mask.values().isApprox(ds.samples[0].mask.values()));
    EXPECT_EQ(back.graph->edges(), ds.graph->edges());
}

TEST(Rng, ForkIsDeterministic) {
    Rng a(42), b(42);
    auto fa = a.fork(3), fb = b.fork(3);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(fa.next_u64(), fb.next_u64());
    auto other = a.fork(4);
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs = differs || (a.fork(3).next_u64() != other.next_u64());
    EXPECT_TRUE(differs);
}
