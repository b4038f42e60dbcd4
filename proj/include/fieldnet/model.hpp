#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

#include "fieldnet/layout.hpp"
#include "fieldnet/network.hpp"

namespace fieldnet {

/// Assignment of one of m treatments to each unit; assignment[v-1] = t(v),
/// labels in 1..m.
struct Design {
    std::vector<int> assignment;
    int m = 0;
};

/// Number of units carrying each treatment, indexed by label - 1.
std::vector<int> replication_counts(const Design& design);

/// Throws ConfigError if the assignment length differs from n_units or any
/// entry falls outside 1..m.
void validate_design(const Design& design, int n_units);

/// Term selection defining one of the eight models:
///
///   CRM    mean + treatments
///   RBM    + superrow/supercolumn/block terms
///   RCM    + row/column terms
///   BRCM   + both blocking families
///   LNM/BNM/RCNM/BRCNM   the same four with the network term added
struct ModelSpec {
    bool include_network = false;
    bool include_superblocks = false;  // R, C, RC terms
    bool include_rowcol = false;       // r, c terms

    bool operator==(const ModelSpec&) const = default;
};

/// Case-insensitive lookup; throws ConfigError listing the valid names.
ModelSpec model_from_name(std::string_view name);
std::string model_name(const ModelSpec& spec);
/// The eight models in nesting order: CRM RBM RCM BRCM LNM BNM RCNM BRCNM.
std::vector<ModelSpec> all_models();

enum class ColumnBlock { mean, treatment, network, superrow, supercol, block, row, column };
std::string column_block_name(ColumnBlock block);

struct ColumnRange {
    ColumnBlock block;
    int offset;  ///< first column index in X (0-based)
    int count;
};

/// Full design/model matrix with named column ranges. The mean column is all
/// ones; treatment and blocking columns are 0/1 indicators with no reference
/// level dropped; the network block equals A * (treatment indicators).
struct ModelMatrix {
    Eigen::MatrixXd X;
    std::vector<ColumnRange> column_blocks;
    int treatment_offset = 1;  ///< first of the m direct-effect columns
    int m = 0;

    const ColumnRange* find_block(ColumnBlock block) const;
};

/// Assembles X in the order mean | treatment | network | R | C | RC | r | c.
/// graph must be present exactly when spec.include_network, with
/// graph->n == layout.n(); throws ConfigError otherwise.
ModelMatrix build_model_matrix(const ModelSpec& spec, const FieldLayout& layout,
                               const NetworkGraph* graph, const Design& design);

/// M = X^T X, explicitly symmetrized.
Eigen::MatrixXd information_matrix(const ModelMatrix& mm);

/// Numerical rank of the submatrix of X holding the mean and all blocking
/// columns (no treatment, no network block), with the criterion module's
/// eigenvalue tolerance.
int nuisance_rank(const ModelSpec& spec, const FieldLayout& layout,
                  const NetworkGraph* graph, const Design& design);

/// Rank of the complete blocking lattice of the layout, including the
/// row-by-supercolumn and superrow-by-column cells. Equals the total of the
/// stratum degrees of freedom above the plot stratum; 36 for a 14 x 6
/// layout with two superrows and two supercolumns.
int unit_structure_rank(const FieldLayout& layout);

}  // namespace fieldnet
