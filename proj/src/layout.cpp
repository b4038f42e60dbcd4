#include "fieldnet/layout.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "fieldnet/errors.hpp"

namespace fieldnet {

namespace {

std::vector<int> group_lookup(const std::vector<int>& sizes) {
    std::vector<int> lookup;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        lookup.insert(lookup.end(), sizes[g], static_cast<int>(g) + 1);
    }
    return lookup;
}

}  // namespace

FieldLayout build_layout(int n_rows, int n_cols,
                         std::vector<int> superrow_sizes,
                         std::vector<int> supercol_sizes,
                         double row_spacing, double col_spacing) {
    if (n_rows < 1) throw ConfigError("n_rows must be at least 1, got " + std::to_string(n_rows));
    if (n_cols < 1) throw ConfigError("n_cols must be at least 1, got " + std::to_string(n_cols));
    if (superrow_sizes.empty()) throw ConfigError("superrow_sizes must not be empty");
    if (supercol_sizes.empty()) throw ConfigError("supercol_sizes must not be empty");
    for (int s : superrow_sizes)
        if (s < 1) throw ConfigError("superrow_sizes entries must be at least 1");
    for (int s : supercol_sizes)
        if (s < 1) throw ConfigError("supercol_sizes entries must be at least 1");

    const int row_sum = std::accumulate(superrow_sizes.begin(), superrow_sizes.end(), 0);
    if (row_sum != n_rows)
        throw ConfigError("superrow_sizes sum to " + std::to_string(row_sum) +
                          " but n_rows is " + std::to_string(n_rows));
    const int col_sum = std::accumulate(supercol_sizes.begin(), supercol_sizes.end(), 0);
    if (col_sum != n_cols)
        throw ConfigError("supercol_sizes sum to " + std::to_string(col_sum) +
                          " but n_cols is " + std::to_string(n_cols));
    if (!(row_spacing > 0.0))
        throw ConfigError("row_spacing must be strictly positive");
    if (!(col_spacing > 0.0))
        throw ConfigError("col_spacing must be strictly positive");

    FieldLayout layout;
    layout.n_rows = n_rows;
    layout.n_cols = n_cols;
    layout.superrow_sizes = std::move(superrow_sizes);
    layout.supercol_sizes = std::move(supercol_sizes);
    layout.row_spacing = row_spacing;
    layout.col_spacing = col_spacing;
    layout.superrow_of_row = group_lookup(layout.superrow_sizes);
    layout.supercol_of_col = group_lookup(layout.supercol_sizes);
    return layout;
}

FactorLabels unit_factors(const FieldLayout& layout, int unit_id) {
    if (unit_id < 1 || unit_id > layout.n())
        throw std::out_of_range("unit id " + std::to_string(unit_id) + " outside 1.." +
                                std::to_string(layout.n()));
    FactorLabels f;
    f.unit_id = unit_id;
    f.global_row = (unit_id - 1) / layout.n_cols + 1;
    f.global_col = (unit_id - 1) % layout.n_cols + 1;
    f.superrow = layout.superrow_of_row[f.global_row - 1];
    f.supercol = layout.supercol_of_col[f.global_col - 1];
    f.block = (f.superrow - 1) * layout.n_supercols() + f.supercol;
    return f;
}

std::pair<double, double> centroid(const FieldLayout& layout, int unit_id) {
    const FactorLabels f = unit_factors(layout, unit_id);
    return {(f.global_col - 1) * layout.col_spacing,
            (f.global_row - 1) * layout.row_spacing};
}

}  // namespace fieldnet
