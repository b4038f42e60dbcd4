#include "fieldnet/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fieldnet/errors.hpp"

namespace fieldnet {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

DrillDirection drill_direction_from_name(std::string_view name) {
    const std::string l = lower(name);
    if (l == "down") return DrillDirection::down;
    if (l == "up") return DrillDirection::up;
    throw ConfigError("unknown drill direction '" + std::string(name) + "' (valid: down, up)");
}

SprayDirection spray_direction_from_name(std::string_view name) {
    const std::string l = lower(name);
    if (l == "right") return SprayDirection::right;
    if (l == "left") return SprayDirection::left;
    throw ConfigError("unknown spray direction '" + std::string(name) + "' (valid: right, left)");
}

NetworkGraph build_king_graph(const FieldLayout& layout) {
    const int n = layout.n();
    NetworkGraph g;
    g.n = n;
    g.directed = false;
    g.label = "king";
    g.weights = Eigen::MatrixXd::Zero(n, n);
    for (int v = 1; v <= n; ++v) {
        const FactorLabels fv = unit_factors(layout, v);
        for (int u = v + 1; u <= n; ++u) {
            const FactorLabels fu = unit_factors(layout, u);
            const int dr = std::abs(fv.global_row - fu.global_row);
            const int dc = std::abs(fv.global_col - fu.global_col);
            if (dr > 1 || dc > 1) continue;
            const double dist = std::hypot(dc * layout.col_spacing, dr * layout.row_spacing);
            g.weights(v - 1, u - 1) = 1.0 / dist;
            g.weights(u - 1, v - 1) = 1.0 / dist;
        }
    }
    return g;
}

NetworkGraph build_farmer_graph(const FieldLayout& layout, DrillDirection drill,
                                SprayDirection spray) {
    const int n = layout.n();
    NetworkGraph g;
    g.n = n;
    g.directed = true;
    g.label = "farmer";
    g.weights = Eigen::MatrixXd::Zero(n, n);
    for (int v = 1; v <= n; ++v) {
        const FactorLabels f = unit_factors(layout, v);
        // Drilling predecessor: same column, adjacent row in pass order.
        const int pred_row = drill == DrillDirection::down ? f.global_row - 1 : f.global_row + 1;
        if (pred_row >= 1 && pred_row <= layout.n_rows) {
            const int u = (pred_row - 1) * layout.n_cols + f.global_col;
            g.weights(v - 1, u - 1) = 1.0;
        }
        // Spraying predecessor: same row, adjacent column in pass order.
        const int pred_col = spray == SprayDirection::right ? f.global_col - 1 : f.global_col + 1;
        if (pred_col >= 1 && pred_col <= layout.n_cols) {
            const int u = (f.global_row - 1) * layout.n_cols + pred_col;
            g.weights(v - 1, u - 1) = 1.0;
        }
    }
    return g;
}

void validate_graph(const NetworkGraph& graph) {
    if (graph.n < 1) throw ConfigError("graph must have at least one vertex");
    if (graph.weights.rows() != graph.n || graph.weights.cols() != graph.n)
        throw ConfigError("graph weights matrix is " + std::to_string(graph.weights.rows()) +
                          "x" + std::to_string(graph.weights.cols()) + " but n is " +
                          std::to_string(graph.n));
    for (int i = 0; i < graph.n; ++i) {
        if (graph.weights(i, i) != 0.0)
            throw ConfigError("diagonal entry at vertex " + std::to_string(i + 1) +
                              " must be zero (no self loops)");
        for (int j = 0; j < graph.n; ++j) {
            const double w = graph.weights(i, j);
            if (!std::isfinite(w) || w < 0.0)
                throw ConfigError("weight (" + std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + ") must be finite and non-negative");
        }
    }
    if (!graph.directed && graph.weights != graph.weights.transpose())
        throw ConfigError("undirected graph has an asymmetric weights matrix");
}

NetworkGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RunError("cannot open graph file: " + path.string());

    NetworkGraph g;
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_seen) {
            int n = 0;
            char directed_word[8] = {0};
            if (std::sscanf(t.c_str(), "n=%d,directed=%7[a-z]", &n, directed_word) != 2)
                throw ParseError("expected header 'n=<count>,directed=<true|false>'", line_no);
            const std::string d = directed_word;
            if (d != "true" && d != "false")
                throw ParseError("directed flag must be 'true' or 'false'", line_no);
            if (n < 1) throw ParseError("vertex count must be at least 1", line_no);
            g.n = n;
            g.directed = d == "true";
            g.weights = Eigen::MatrixXd::Zero(n, n);
            header_seen = true;
            continue;
        }
        int from = 0, to = 0;
        double w = 0.0;
        char tail = 0;
        const int got = std::sscanf(t.c_str(), "%d,%d,%lf%c", &from, &to, &w, &tail);
        if (got != 3)
            throw ParseError("expected 'from,to,weight', got '" + t + "'", line_no);
        if (from < 1 || from > g.n || to < 1 || to > g.n)
            throw ParseError("vertex index outside 1.." + std::to_string(g.n), line_no);
        if (from == to)
            throw ParseError("self loop at vertex " + std::to_string(from) +
                             " (diagonal must be zero)", line_no);
        if (!std::isfinite(w) || w < 0.0)
            throw ParseError("weight must be finite and non-negative", line_no);
        g.weights(to - 1, from - 1) = w;
        if (!g.directed) g.weights(from - 1, to - 1) = w;
    }
    if (!header_seen) throw ParseError("missing header line 'n=<count>,directed=<true|false>'", line_no);
    validate_graph(g);
    if (g.label.empty()) g.label = path.stem().string();
    return g;
}

void save_graph(const NetworkGraph& graph, const std::filesystem::path& path) {
    validate_graph(graph);
    std::ofstream out(path);
    if (!out) throw RunError("cannot write graph file: " + path.string());
    out << "# " << (graph.label.empty() ? std::string("graph") : graph.label)
        << ": from,to,weight with A[to,from] = weight\n";
    out << "n=" << graph.n << ",directed=" << (graph.directed ? "true" : "false") << "\n";
    char buf[64];
    for (int to = 0; to < graph.n; ++to) {
        for (int from = 0; from < graph.n; ++from) {
            const double w = graph.weights(to, from);
            if (w == 0.0) continue;
            // Undirected pairs are stored once, lower index first.
            if (!graph.directed && from > to) continue;
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g", from + 1, to + 1, w);
            out << buf << "\n";
        }
    }
    if (!out) throw RunError("write failed: " + path.string());
}

}  // namespace fieldnet
