#include "fieldnet/model.hpp"

#include <algorithm>
#include <cctype>

#include "fieldnet/criterion.hpp"
#include "fieldnet/errors.hpp"

namespace fieldnet {

std::vector<int> replication_counts(const Design& design) {
    std::vector<int> counts(design.m, 0);
    for (int t : design.assignment) {
        if (t >= 1 && t <= design.m) ++counts[t - 1];
    }
    return counts;
}

void validate_design(const Design& design, int n_units) {
    if (static_cast<int>(design.assignment.size()) != n_units)
        throw ConfigError("design has " + std::to_string(design.assignment.size()) +
                          " entries but the layout has " + std::to_string(n_units) + " units");
    if (design.m < 1) throw ConfigError("treatment count must be at least 1");
    for (std::size_t v = 0; v < design.assignment.size(); ++v) {
        const int t = design.assignment[v];
        if (t < 1 || t > design.m)
            throw ConfigError("unit " + std::to_string(v + 1) + " carries treatment " +
                              std::to_string(t) + ", outside 1.." + std::to_string(design.m));
    }
}

ModelSpec model_from_name(std::string_view name) {
    std::string u(name);
    std::transform(u.begin(), u.end(), u.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (u == "CRM") return {false, false, false};
    if (u == "RBM") return {false, true, false};
    if (u == "RCM") return {false, false, true};
    if (u == "BRCM") return {false, true, true};
    if (u == "LNM") return {true, false, false};
    if (u == "BNM") return {true, true, false};
    if (u == "RCNM") return {true, false, true};
    if (u == "BRCNM") return {true, true, true};
    throw ConfigError("unknown model '" + std::string(name) +
                      "' (valid: CRM, RBM, RCM, BRCM, LNM, BNM, RCNM, BRCNM)");
}

std::string model_name(const ModelSpec& spec) {
    if (spec.include_network) {
        if (spec.include_superblocks && spec.include_rowcol) return "BRCNM";
        if (spec.include_superblocks) return "BNM";
        if (spec.include_rowcol) return "RCNM";
        return "LNM";
    }
    if (spec.include_superblocks && spec.include_rowcol) return "BRCM";
    if (spec.include_superblocks) return "RBM";
    if (spec.include_rowcol) return "RCM";
    return "CRM";
}

std::vector<ModelSpec> all_models() {
    return {model_from_name("CRM"), model_from_name("RBM"), model_from_name("RCM"),
            model_from_name("BRCM"), model_from_name("LNM"), model_from_name("BNM"),
            model_from_name("RCNM"), model_from_name("BRCNM")};
}

std::string column_block_name(ColumnBlock block) {
    switch (block) {
        case ColumnBlock::mean: return "mean";
        case ColumnBlock::treatment: return "treatment";
        case ColumnBlock::network: return "network";
        case ColumnBlock::superrow: return "superrow";
        case ColumnBlock::supercol: return "supercol";
        case ColumnBlock::block: return "block";
        case ColumnBlock::row: return "row";
        case ColumnBlock::column: return "column";
    }
    return "?";
}

const ColumnRange* ModelMatrix::find_block(ColumnBlock block) const {
    for (const auto& range : column_blocks)
        if (range.block == block) return &range;
    return nullptr;
}

namespace {

// 0/1 indicator columns, one per level; label(v) is 1-based.
template <typename LabelFn>
Eigen::MatrixXd indicator(int n, int levels, LabelFn label) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, levels);
    for (int v = 1; v <= n; ++v) X(v - 1, label(v) - 1) = 1.0;
    return X;
}

Eigen::MatrixXd treatment_indicator(const Design& design) {
    const int n = static_cast<int>(design.assignment.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, design.m);
    for (int v = 0; v < n; ++v) X(v, design.assignment[v] - 1) = 1.0;
    return X;
}

struct BlockingColumns {
    std::vector<std::pair<ColumnBlock, Eigen::MatrixXd>> parts;
};

BlockingColumns blocking_columns(const ModelSpec& spec, const FieldLayout& layout) {
    BlockingColumns out;
    const int n = layout.n();
    auto labels = [&](auto fn) { return [&layout, fn](int v) { return fn(unit_factors(layout, v)); }; };
    if (spec.include_superblocks) {
        out.parts.emplace_back(ColumnBlock::superrow,
                               indicator(n, layout.n_superrows(), labels([](const FactorLabels& f) { return f.superrow; })));
        out.parts.emplace_back(ColumnBlock::supercol,
                               indicator(n, layout.n_supercols(), labels([](const FactorLabels& f) { return f.supercol; })));
        out.parts.emplace_back(ColumnBlock::block,
                               indicator(n, layout.n_blocks(), labels([](const FactorLabels& f) { return f.block; })));
    }
    if (spec.include_rowcol) {
        out.parts.emplace_back(ColumnBlock::row,
                               indicator(n, layout.n_rows, labels([](const FactorLabels& f) { return f.global_row; })));
        out.parts.emplace_back(ColumnBlock::column,
                               indicator(n, layout.n_cols, labels([](const FactorLabels& f) { return f.global_col; })));
    }
    return out;
}

}  // namespace

ModelMatrix build_model_matrix(const ModelSpec& spec, const FieldLayout& layout,
                               const NetworkGraph* graph, const Design& design) {
    const int n = layout.n();
    validate_design(design, n);
    if (spec.include_network && graph == nullptr)
        throw ConfigError("model " + model_name(spec) + " needs a network graph");
    if (spec.include_network && graph->n != n)
        throw ConfigError("graph has " + std::to_string(graph->n) + " vertices but the layout has " +
                          std::to_string(n) + " units");

    const Eigen::MatrixXd X_tau = treatment_indicator(design);
    const BlockingColumns blocking = blocking_columns(spec, layout);

    int p = 1 + design.m + (spec.include_network ? design.m : 0);
    for (const auto& [block, cols] : blocking.parts) p += static_cast<int>(cols.cols());

    ModelMatrix mm;
    mm.X.resize(n, p);
    mm.m = design.m;
    int offset = 0;
    auto append = [&](ColumnBlock block, const Eigen::MatrixXd& cols) {
        mm.X.middleCols(offset, cols.cols()) = cols;
        mm.column_blocks.push_back({block, offset, static_cast<int>(cols.cols())});
        offset += static_cast<int>(cols.cols());
    };

    append(ColumnBlock::mean, Eigen::MatrixXd::Ones(n, 1));
    mm.treatment_offset = offset;
    append(ColumnBlock::treatment, X_tau);
    if (spec.include_network) append(ColumnBlock::network, graph->weights * X_tau);
    for (const auto& [block, cols] : blocking.parts) append(block, cols);
    return mm;
}

Eigen::MatrixXd information_matrix(const ModelMatrix& mm) {
    Eigen::MatrixXd M = mm.X.transpose() * mm.X;
    M = ((M + M.transpose()) * 0.5).eval();
    return M;
}

namespace {

int rank_of_columns(const Eigen::MatrixXd& N) {
    const Eigen::MatrixXd M = N.transpose() * N;
    return pseudo_inverse(M).rank;
}

}  // namespace

int nuisance_rank(const ModelSpec& spec, const FieldLayout& layout,
                  const NetworkGraph* graph, const Design& design) {
    const ModelMatrix mm = build_model_matrix(spec, layout, graph, design);
    const int n = layout.n();
    int width = 1;
    for (const auto& range : mm.column_blocks) {
        if (range.block == ColumnBlock::mean || range.block == ColumnBlock::treatment ||
            range.block == ColumnBlock::network)
            continue;
        width += range.count;
    }
    Eigen::MatrixXd N(n, width);
    int offset = 0;
    for (const auto& range : mm.column_blocks) {
        if (range.block == ColumnBlock::treatment || range.block == ColumnBlock::network)
            continue;
        N.middleCols(offset, range.count) = mm.X.middleCols(range.offset, range.count);
        offset += range.count;
    }
    return rank_of_columns(N);
}

int unit_structure_rank(const FieldLayout& layout) {
    const int n = layout.n();
    const int b2 = layout.n_supercols();
    const int b1 = layout.n_superrows();
    auto labels = [&](auto fn) { return [&layout, fn](int v) { return fn(unit_factors(layout, v)); }; };
    // Complete blocking lattice: the row-by-supercolumn and superrow-by-column
    // cells span every coarser factor (rows, columns, blocks, the mean).
    Eigen::MatrixXd cells_rC = indicator(n, layout.n_rows * b2, labels([b2](const FactorLabels& f) {
                                             return (f.global_row - 1) * b2 + f.supercol;
                                         }));
    Eigen::MatrixXd cells_Rc = indicator(n, layout.n_cols * b1, labels([&layout](const FactorLabels& f) {
                                             return (f.superrow - 1) * layout.n_cols + f.global_col;
                                         }));
    Eigen::MatrixXd N(n, cells_rC.cols() + cells_Rc.cols());
    N << cells_rC, cells_Rc;
    return rank_of_columns(N);
}

}  // namespace fieldnet
