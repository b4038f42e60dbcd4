#include "doctest.h"

#include <algorithm>
#include <random>

#include "fieldnet/criterion.hpp"
#include "fieldnet/errors.hpp"
#include "fieldnet/model.hpp"
#include "fieldnet/network.hpp"
#include "fieldnet/optimizer.hpp"

using namespace fieldnet;

namespace {

FieldLayout field_14x6() { return build_layout(14, 6, {7, 7}, {3, 3}, 1.75, 1.5); }

Design equireplicated_design(int n, int m, std::uint64_t seed) {
    Design d;
    d.m = m;
    for (int t = 1; t <= m; ++t) d.assignment.insert(d.assignment.end(), n / m, t);
    Rng rng = make_restart_rng(seed, 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(d.assignment[i], d.assignment[uniform_below(rng, i + 1)]);
    return d;
}

}  // namespace

TEST_CASE("model names round trip and are case-insensitive") {
    for (const char* name : {"CRM", "RBM", "RCM", "BRCM", "LNM", "BNM", "RCNM", "BRCNM"})
        CHECK(model_name(model_from_name(name)) == name);
    CHECK(model_name(model_from_name("brcnm")) == "BRCNM");
    CHECK(model_from_name("Lnm").include_network);
    CHECK_THROWS_WITH_AS(model_from_name("XYZ"), doctest::Contains("BRCNM"), ConfigError);
    CHECK(all_models().size() == 8);
}

TEST_CASE("design validation and replication counts") {
    Design d = equireplicated_design(84, 21, 3);
    validate_design(d, 84);
    const std::vector<int> counts = replication_counts(d);
    REQUIRE(counts.size() == 21);
    for (int c : counts) CHECK(c == 4);

    d.assignment[5] = 22;
    CHECK_THROWS_AS(validate_design(d, 84), ConfigError);
    d.assignment[5] = 0;
    CHECK_THROWS_AS(validate_design(d, 84), ConfigError);
    d.assignment.pop_back();
    CHECK_THROWS_AS(validate_design(d, 84), ConfigError);
}

TEST_CASE("model matrix shapes on the 14x6 layout") {
    const FieldLayout layout = field_14x6();
    const NetworkGraph king = build_king_graph(layout);
    const Design design = equireplicated_design(84, 21, 7);

    const ModelMatrix crm = build_model_matrix(model_from_name("CRM"), layout, nullptr, design);
    CHECK(crm.X.rows() == 84);
    CHECK(crm.X.cols() == 22);  // mean + 21 treatments
    CHECK(crm.treatment_offset == 1);

    const ModelMatrix brcnm =
        build_model_matrix(model_from_name("BRCNM"), layout, &king, design);
    CHECK(brcnm.X.cols() == 1 + 21 + 21 + 2 + 2 + 4 + 14 + 6);
    CHECK(brcnm.find_block(ColumnBlock::mean)->count == 1);
    CHECK(brcnm.find_block(ColumnBlock::treatment)->count == 21);
    CHECK(brcnm.find_block(ColumnBlock::network)->count == 21);
    CHECK(brcnm.find_block(ColumnBlock::superrow)->count == 2);
    CHECK(brcnm.find_block(ColumnBlock::supercol)->count == 2);
    CHECK(brcnm.find_block(ColumnBlock::block)->count == 4);
    CHECK(brcnm.find_block(ColumnBlock::row)->count == 14);
    CHECK(brcnm.find_block(ColumnBlock::column)->count == 6);

    // Mean column is all ones; indicator blocks have unit row sums.
    CHECK(brcnm.X.col(0) == Eigen::VectorXd::Ones(84));
    for (ColumnBlock block : {ColumnBlock::treatment, ColumnBlock::superrow, ColumnBlock::supercol,
                              ColumnBlock::block, ColumnBlock::row, ColumnBlock::column}) {
        const ColumnRange* range = brcnm.find_block(block);
        REQUIRE(range != nullptr);
        const Eigen::VectorXd row_sums =
            brcnm.X.middleCols(range->offset, range->count).rowwise().sum();
        CHECK(row_sums.isApproxToConstant(1.0, 1e-14));
    }

    CHECK_THROWS_AS(build_model_matrix(model_from_name("LNM"), layout, nullptr, design),
                    ConfigError);
}

TEST_CASE("network block sums neighbour weights by treatment") {
    const FieldLayout layout = field_14x6();
    const NetworkGraph king = build_king_graph(layout);
    const Design design = equireplicated_design(84, 21, 11);
    const ModelMatrix mm = build_model_matrix(model_from_name("LNM"), layout, &king, design);
    const ColumnRange* gamma = mm.find_block(ColumnBlock::network);
    REQUIRE(gamma != nullptr);

    // Direct double loop over neighbours as the oracle.
    for (int v = 0; v < 84; ++v) {
        for (int s = 1; s <= 21; ++s) {
            double expected = 0.0;
            for (int u = 0; u < 84; ++u)
                if (design.assignment[u] == s) expected += king.weights(v, u);
            CHECK(mm.X(v, gamma->offset + s - 1) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero graph collapses the network block") {
    const FieldLayout layout = field_14x6();
    NetworkGraph zero;
    zero.n = 84;
    zero.directed = true;
    zero.label = "zero";
    zero.weights = Eigen::MatrixXd::Zero(84, 84);
    const Design design = equireplicated_design(84, 21, 5);
    const ModelMatrix mm = build_model_matrix(model_from_name("LNM"), layout, &zero, design);
    const ColumnRange* gamma = mm.find_block(ColumnBlock::network);
    CHECK(mm.X.middleCols(gamma->offset, gamma->count).isZero(0.0));
}

TEST_CASE("information matrix basics") {
    const FieldLayout layout = field_14x6();
    const Design design = equireplicated_design(84, 21, 13);
    const ModelMatrix mm = build_model_matrix(model_from_name("CRM"), layout, nullptr, design);
    const Eigen::MatrixXd M = information_matrix(mm);

    CHECK(M(0, 0) == doctest::Approx(84.0));
    const std::vector<int> counts = replication_counts(design);
    for (int s = 0; s < 21; ++s)
        CHECK(M(1 + s, 1 + s) == doctest::Approx(static_cast<double>(counts[s])));
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simpler models reuse identical column blocks of richer ones") {
    const FieldLayout layout = field_14x6();
    const NetworkGraph king = build_king_graph(layout);
    const Design design = equireplicated_design(84, 21, 17);
    const ModelMatrix full = build_model_matrix(model_from_name("BRCNM"), layout, &king, design);

    for (const char* name : {"CRM", "RBM", "RCM", "BRCM", "LNM", "BNM", "RCNM"}) {
        const ModelSpec spec = model_from_name(name);
        const ModelMatrix sub =
            build_model_matrix(spec, layout, spec.include_network ? &king : nullptr, design);
        for (const ColumnRange& range : sub.column_blocks) {
            const ColumnRange* in_full = full.find_block(range.block);
            REQUIRE(in_full != nullptr);
            CHECK(in_full->count == range.count);
            CHECK(sub.X.middleCols(range.offset, range.count) ==
                  full.X.middleCols(in_full->offset, in_full->count));
        }
    }
}

TEST_CASE("nuisance ranks on the 14x6 layout") {
    const FieldLayout layout = field_14x6();
    const NetworkGraph king = build_king_graph(layout);
    const Design design = equireplicated_design(84, 21, 19);

    CHECK(nuisance_rank(model_from_name("CRM"), layout, nullptr, design) == 1);
    CHECK(nuisance_rank(model_from_name("RBM"), layout, nullptr, design) == 4);
    CHECK(nuisance_rank(model_from_name("RCM"), layout, nullptr, design) == 19);
    CHECK(nuisance_rank(model_from_name("BRCM"), layout, nullptr, design) == 20);
    // The network block is excluded, so the network variants match.
    CHECK(nuisance_rank(model_from_name("BRCNM"), layout, &king, design) == 20);
}

TEST_CASE("unit structure rank matches the Hasse degrees of freedom") {
    const FieldLayout layout = field_14x6();
    // mean 1, superrows 1, supercols 1, blocks 1, rows 12, cols 4,
    // row-by-supercol cells 12, superrow-by-col cells 4.
    CHECK(unit_structure_rank(layout) == 36);

    const FieldLayout tiny = build_layout(2, 2, {1, 1}, {1, 1}, 1.0, 1.0);
    CHECK(unit_structure_rank(tiny) == 4);  // every plot is its own block
}
