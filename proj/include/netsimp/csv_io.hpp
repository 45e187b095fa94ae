#ifndef NETSIMP_CSV_IO_HPP
#define NETSIMP_CSV_IO_HPP

#include <Eigen/Core>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsimp/dataset.hpp"
#include "netsimp/graph.hpp"
#include "netsimp/ini.hpp"

namespace netsimp {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, const std::string& file, int line_no) {
    try {
        size_t pos = 0;
        const double x = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw std::runtime_error(file + ":" + std::to_string(line_no) + ": bad numeric field '" +
                                 s + "'");
    }
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace detail

/// Series CSV: header row `node_0,...,node_{V-1}`, then one row of reals
/// per timestamp. Returns a V x T matrix (nodes as rows).
inline Eigen::MatrixXd load_series_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty series file");
    const auto header = detail::split_csv_line(lines[0]);
    const int v_count = static_cast<int>(header.size());
    for (int v = 0; v < v_count; ++v)
        if (header[static_cast<size_t>(v)] != "node_" + std::to_string(v))
            throw std::runtime_error(path + ":1: expected header field node_" + std::to_string(v) +
                                     ", got '" + header[static_cast<size_t>(v)] + "'");
    const int t_count = static_cast<int>(lines.size()) - 1;
    if (t_count < 1) throw std::runtime_error(path + ": no data rows");
    Eigen::MatrixXd series(v_count, t_count);
    for (int t = 0; t < t_count; ++t) {
        const auto fields = detail::split_csv_line(lines[static_cast<size_t>(t) + 1]);
        if (static_cast<int>(fields.size()) != v_count)
            throw std::runtime_error(path + ":" + std::to_string(t + 2) + ": expected " +
                                     std::to_string(v_count) + " fields, got " +
                                     std::to_string(fields.size()));
        for (int v = 0; v < v_count; ++v)
            series(v, t) = detail::parse_double(fields[static_cast<size_t>(v)], path, t + 2);
    }
    return series;
}

inline void save_series_csv(const std::string& path, const Eigen::MatrixXd& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (Eigen::Index v = 0; v < series.rows(); ++v)
        out << (v ? "," : "") << "node_" << v;
    out << "\n";
    char buf[40];
    for (Eigen::Index t = 0; t < series.cols(); ++t) {
        for (Eigen::Index v = 0; v < series.rows(); ++v) {
            std::snprintf(buf, sizeof buf, "%.17g", series(v, t));
            out << (v ? "," : "") << buf;
        }
        out << "\n";
    }
}

/// Mask CSV: same layout as a series file, entries restricted to {0, 1}.
inline Eigen::MatrixXd load_mask_csv(const std::string& path) {
    Eigen::MatrixXd m = load_series_csv(path);
    for (Eigen::Index v = 0; v < m.rows(); ++v)
        for (Eigen::Index t = 0; t < m.cols(); ++t)
            if (m(v, t) != 0.0 && m(v, t) != 1.0)
                throw std::runtime_error(path + ":" + std::to_string(t + 2) +
                                         ": mask entry must be 0 or 1, got " +
                                         std::to_string(m(v, t)));
    return m;
}

/// Graph CSV: one `i,j[,weight]` edge per line, 0-indexed. Duplicates and
/// reversed duplicates collapse to one undirected edge.
inline std::shared_ptr<const Graph> load_graph_csv(const std::string& path, int node_count) {
    const auto lines = detail::read_lines(path);
    std::vector<Graph::Edge> edges;
    std::map<Graph::Edge, double> weights;
    for (size_t k = 0; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        const auto fields = detail::split_csv_line(lines[k]);
        const int line_no = static_cast<int>(k) + 1;
        if (fields.size() != 2 && fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'i,j[,weight]'");
        const int i = static_cast<int>(detail::parse_double(fields[0], path, line_no));
        const int j = static_cast<int>(detail::parse_double(fields[1], path, line_no));
        Graph::Edge e = i <= j ? Graph::Edge{i, j} : Graph::Edge{j, i};
        edges.push_back(e);
        if (fields.size() == 3) weights[e] = detail::parse_double(fields[2], path, line_no);
    }
    try {
        return std::make_shared<const Graph>(node_count, std::move(edges), std::move(weights));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void save_graph_csv(const std::string& path, const Graph& graph) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& e : graph.edges()) {
        out << e.first << "," << e.second;
        if (graph.has_weights()) out << "," << graph.weight(e.first, e.second);
        out << "\n";
    }
}

/// Loads a dataset from explicit file paths. An empty mask path means the
/// data are complete.
inline NetsDataset load_dataset(const std::string& series_path, const std::string& graph_path,
                                const LayoutSpec& layout, const std::string& mask_path = "") {
    Eigen::MatrixXd series = load_series_csv(series_path);
    auto graph = load_graph_csv(graph_path, static_cast<int>(series.rows()));
    Eigen::MatrixXd mask;
    if (mask_path.empty()) {
        mask = Eigen::MatrixXd::Ones(series.rows(), series.cols());
    } else {
        mask = load_mask_csv(mask_path);
        if (mask.rows() != series.rows() || mask.cols() != series.cols())
            throw std::runtime_error(mask_path + ": mask shape does not match series");
    }
    return window_series(graph, series, mask, layout);
}

/// Dataset directory layout: series.csv + graph.csv + mask.csv + meta.ini.
/// Saving concatenates the windows back along time, so it is exact for
/// non-overlapping layouts (stride == t_total). Missing entries are stored
/// as the carrier value 0.
inline void save_dataset(const NetsDataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto [series, mask] = concat_samples(ds);
    series = series.cwiseProduct(mask);  // storage carrier for missing entries is 0
    save_series_csv((fs::path(dir) / "series.csv").string(), series);
    save_series_csv((fs::path(dir) / "mask.csv").string(), mask);
    save_graph_csv((fs::path(dir) / "graph.csv").string(), *ds.graph);
    std::ofstream meta(fs::path(dir) / "meta.ini");
    meta << "[layout]\n";
    meta << "t_total = " << ds.layout.t_total << "\n";
    meta << "t_history = " << ds.layout.t_history << "\n";
    meta << "window_stride = " << ds.layout.t_total << "\n";
    meta << "split_train = " << ds.layout.split_train << "\n";
    meta << "split_validation = " << ds.layout.split_validation << "\n";
}

inline LayoutSpec layout_from_ini(const IniFile& ini) {
    LayoutSpec layout;
    layout.t_total = static_cast<int>(ini.get_int("layout.t_total", layout.t_total));
    layout.t_history = static_cast<int>(ini.get_int("layout.t_history", layout.t_history));
    layout.window_stride =
        static_cast<int>(ini.get_int("layout.window_stride", layout.window_stride));
    layout.split_train = ini.get_double("layout.split_train", layout.split_train);
    layout.split_validation = ini.get_double("layout.split_validation", layout.split_validation);
    layout.validate();
    return layout;
}

inline NetsDataset load_dataset_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path p(dir);
    LayoutSpec layout;
    if (fs::exists(p / "meta.ini")) layout = layout_from_ini(IniFile::parse_file((p / "meta.ini").string()));
    const std::string mask_path =
        fs::exists(p / "mask.csv") ? (p / "mask.csv").string() : std::string();
    return load_dataset((p / "series.csv").string(), (p / "graph.csv").string(), layout,
                        mask_path);
}

}  // namespace netsimp

#endif  // NETSIMP_CSV_IO_HPP
