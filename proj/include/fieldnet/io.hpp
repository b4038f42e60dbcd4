#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fieldnet/layout.hpp"
#include "fieldnet/model.hpp"
#include "fieldnet/network.hpp"
#include "fieldnet/optimizer.hpp"

namespace fieldnet {

/// Design CSV: header `plot,global_row,global_col,treatment`, 1-based
/// integers, one row per plot, ids 1..n each exactly once. The writer appends
/// derived `superrow,supercol,block` columns for human audit; the reader
/// ignores extra columns.
Design read_design(const std::filesystem::path& path);
/// As above, additionally checking the row count and every (row, col) pair
/// against the layout's row-major convention.
Design read_design(const std::filesystem::path& path, const FieldLayout& layout);
void write_design(const Design& design, const FieldLayout& layout,
                  const std::filesystem::path& path);

/// Flat `key = value` run configuration. `#` starts a comment. Keys: rows,
/// cols, superrows, supercols (comma lists), row_spacing_m, col_spacing_m,
/// model, graph (king | farmer | file path), drill_direction, spray_direction,
/// mode, treatments, restarts, max_passes, seed.
struct RunConfig {
    int rows = 14;
    int cols = 6;
    std::vector<int> superrows{7, 7};
    std::vector<int> supercols{3, 3};
    double row_spacing_m = 1.75;
    double col_spacing_m = 1.5;
    std::string model = "BRCNM";
    std::string graph = "king";
    std::string drill_direction = "down";
    std::string spray_direction = "right";
    std::string mode = "resolved";
    int treatments = 0;  ///< 0 = one replicate per block (requires equal block sizes)
    int restarts = 10;
    int max_passes = 50;
    std::uint64_t seed = 42;
};

RunConfig load_run_config(const std::filesystem::path& path);
FieldLayout layout_from_config(const RunConfig& config);
/// Resolves treatments = 0 to n / blocks; throws ConfigError when block sizes differ.
int treatment_count_from_config(const RunConfig& config, const FieldLayout& layout);
/// Builds the king/farmer graph or loads an edge-list file.
NetworkGraph graph_from_config(const RunConfig& config, const FieldLayout& layout);

/// phi of every design under every requested model, with efficiencies
/// relative to each column's best value.
struct EvaluationReport {
    std::vector<std::string> design_names;
    std::vector<std::string> model_names;
    std::vector<std::vector<double>> phi;         ///< [design][model]
    std::vector<std::vector<double>> efficiency;  ///< column best / cell, 0 for inestimable
    std::string graph_label;
};

/// Evaluates phi for every design x model cell through the full information
/// matrix route. Network models use the supplied graph; requesting one with
/// graph == nullptr is a ConfigError. Inestimable cells carry +infinity and
/// the run continues.
EvaluationReport evaluate_table(const std::vector<std::pair<std::string, Design>>& designs,
                                const FieldLayout& layout, const NetworkGraph* graph,
                                const std::vector<ModelSpec>& models);

/// Report JSON with top-level keys meta, phi_table, efficiency_table,
/// designs. Inestimable cells render as the string "inf"; finite values as
/// round-trip-exact JSON numbers. Identical inputs give identical table
/// bytes; the timestamp lives in meta only.
std::string render_report_json(const EvaluationReport& report,
                               const std::vector<std::pair<std::string, Design>>& designs,
                               const FieldLayout& layout);

/// Aligned text rendering of the phi table for terminal output.
std::string render_report_text(const EvaluationReport& report);

}  // namespace fieldnet
