#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>

#include "fieldnet/layout.hpp"

namespace fieldnet {

/// Interference structure between plots as a weighted adjacency matrix.
///
/// weights(v, u) is the influence of unit u's treatment on unit v (0-based
/// indices internally, unit ids are index + 1). The diagonal is identically
/// zero, all entries are non-negative and finite, and undirected graphs are
/// symmetric. Immutable after construction.
struct NetworkGraph {
    int n = 0;
    bool directed = false;
    std::string label;
    Eigen::MatrixXd weights;
};

enum class DrillDirection { down, up };
enum class SprayDirection { right, left };

DrillDirection drill_direction_from_name(std::string_view name);
SprayDirection spray_direction_from_name(std::string_view name);

/// Undirected graph linking each plot to its <= 8 surrounding plots (at most
/// one step away in both row and column), weighted by inverse Euclidean
/// centroid distance.
NetworkGraph build_king_graph(const FieldLayout& layout);

/// Directed, unweighted graph encoding the order of field operations: each
/// unit receives an edge from its predecessor in the drilling pass (same
/// column, adjacent row) and from its predecessor in the spraying pass (same
/// row, adjacent column). Passes span the whole field.
NetworkGraph build_farmer_graph(const FieldLayout& layout,
                                DrillDirection drill = DrillDirection::down,
                                SprayDirection spray = SprayDirection::right);

/// Checks the NetworkGraph invariants; throws ConfigError on violation.
void validate_graph(const NetworkGraph& graph);

/// Edge-list text format: header `n=<count>,directed=<true|false>`, one
/// `from,to,weight` record per line with 1-based indices, `#` starts a
/// comment. Undirected graphs store each unordered pair once and the loader
/// mirrors the entry. load(save(g)) reproduces the weights matrix bitwise.
NetworkGraph load_graph(const std::filesystem::path& path);
void save_graph(const NetworkGraph& graph, const std::filesystem::path& path);

}  // namespace fieldnet
