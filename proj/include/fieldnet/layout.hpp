#pragma once

#include <utility>
#include <vector>

namespace fieldnet {

/// Rectangular field of plots with contiguous superrow/supercolumn groupings.
///
/// Unit ids are 1-based and row-major from the top-left plot:
/// unit_id = (global_row - 1) * n_cols + global_col. The crossing of one
/// superrow with one supercolumn forms a block; blocks are numbered row-major
/// as well, block = (superrow - 1) * n_supercols + supercol. Immutable after
/// construction and safe for concurrent reads.
struct FieldLayout {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> superrow_sizes;
    std::vector<int> supercol_sizes;
    double row_spacing = 1.0;  ///< centre-to-centre vertical distance, metres
    double col_spacing = 1.0;  ///< centre-to-centre horizontal distance, metres

    // Lookup tables filled by build_layout, 1-based values.
    std::vector<int> superrow_of_row;
    std::vector<int> supercol_of_col;

    int n() const { return n_rows * n_cols; }
    int n_superrows() const { return static_cast<int>(superrow_sizes.size()); }
    int n_supercols() const { return static_cast<int>(supercol_sizes.size()); }
    int n_blocks() const { return n_superrows() * n_supercols(); }
};

/// All five factor labels of one experimental unit (1-based throughout).
struct FactorLabels {
    int unit_id;
    int superrow;
    int supercol;
    int block;
    int global_row;
    int global_col;
};

/// Validates the dimensions and returns the layout with lookup tables filled.
/// Throws ConfigError naming the offending field on any mismatch.
FieldLayout build_layout(int n_rows, int n_cols,
                         std::vector<int> superrow_sizes,
                         std::vector<int> supercol_sizes,
                         double row_spacing, double col_spacing);

/// Factor labels of unit_id under the row-major convention.
/// Throws std::out_of_range for ids outside 1..n.
FactorLabels unit_factors(const FieldLayout& layout, int unit_id);

/// Plot centroid (x, y) in metres; x grows rightward with columns, y grows
/// downward with rows, the top-left plot sits at the origin.
std::pair<double, double> centroid(const FieldLayout& layout, int unit_id);

}  // namespace fieldnet
