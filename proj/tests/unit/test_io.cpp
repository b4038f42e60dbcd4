#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fieldnet/cli.hpp"
#include "fieldnet/criterion.hpp"
#include "fieldnet/errors.hpp"
#include "fieldnet/io.hpp"
#include "fieldnet/optimizer.hpp"

using namespace fieldnet;

namespace {

FieldLayout field_14x6() { return build_layout(14, 6, {7, 7}, {3, 3}, 1.75, 1.5); }

Design equireplicated_design(int n, int m, std::uint64_t seed) {
    std::vector<int> pool;
    for (int t = 1; t <= m; ++t) pool.insert(pool.end(), n / m, t);
    Rng rng = make_restart_rng(seed, 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(pool[i], pool[uniform_below(rng, i + 1)]);
    Design d;
    d.assignment = std::move(pool);
    d.m = m;
    return d;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("fieldnet_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"fieldnet"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("design CSV round trip") {
    TempDir dir;
    const FieldLayout layout = field_14x6();
    const Design design = equireplicated_design(84, 21, 3);
    const auto path = dir.path / "design.csv";

    write_design(design, layout, path);
    const Design loaded = read_design(path, layout);
    CHECK(loaded.assignment == design.assignment);
    CHECK(loaded.m == design.m);

    const Design plain = read_design(path);
    CHECK(plain.assignment == design.assignment);
}

TEST_CASE("design CSV validation") {
    TempDir dir;
    const FieldLayout layout = field_14x6();
    const auto path = dir.path / "bad.csv";

    SUBCASE("missing plot") {
        const Design design = equireplicated_design(84, 21, 5);
        write_design(design, layout, path);
        // Drop the line for plot 84.
        std::ifstream in(path);
        std::stringstream kept;
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("84,", 0) != 0) kept << line << '\n';
        std::ofstream(path) << kept.str();
        CHECK_THROWS_WITH_AS(read_design(path, layout), doctest::Contains("missing plot 84"),
                             ConfigError);
    }
    SUBCASE("duplicate plot") {
        std::ofstream(path) << "plot,global_row,global_col,treatment\n"
                            << "1,1,1,1\n1,1,1,2\n";
        CHECK_THROWS_WITH_AS(read_design(path), doctest::Contains("duplicate plot 1"),
                             ConfigError);
    }
    SUBCASE("treatment below one") {
        std::ofstream(path) << "plot,global_row,global_col,treatment\n"
                            << "1,1,1,0\n2,1,2,1\n";
        CHECK_THROWS_AS(read_design(path), ConfigError);
    }
    SUBCASE("coordinates must match the layout") {
        std::ofstream out(path);
        out << "plot,global_row,global_col,treatment\n";
        for (int plot = 1; plot <= 84; ++plot) out << plot << ",1,1," << 1 + plot % 21 << "\n";
        out.close();
        CHECK_THROWS_AS(read_design(path, layout), ConfigError);
    }
    SUBCASE("wrong header") {
        std::ofstream(path) << "unit,row,col,trt\n1,1,1,1\n";
        CHECK_THROWS_AS(read_design(path), fieldnet::ParseError);
    }
}

TEST_CASE("run config parsing") {
    TempDir dir;
    const auto path = dir.path / "run.conf";

    SUBCASE("full file") {
        std::ofstream(path) << "# demo\n"
                            << "rows = 4\ncols = 2\nsuperrows = 2,2\nsupercols = 2\n"
                            << "row_spacing_m = 1.0\ncol_spacing_m = 0.5\n"
                            << "model = RCNM\ngraph = farmer\ndrill_direction = up\n"
                            << "spray_direction = left\nmode = equal_replicated\n"
                            << "treatments = 4\nrestarts = 3\nmax_passes = 9\nseed = 99\n";
        const RunConfig config = load_run_config(path);
        CHECK(config.rows == 4);
        CHECK(config.cols == 2);
        CHECK(config.superrows == std::vector<int>{2, 2});
        CHECK(config.supercols == std::vector<int>{2});
        CHECK(config.model == "RCNM");
        CHECK(config.graph == "farmer");
        CHECK(config.drill_direction == "up");
        CHECK(config.spray_direction == "left");
        CHECK(config.mode == "equal_replicated");
        CHECK(config.treatments == 4);
        CHECK(config.restarts == 3);
        CHECK(config.max_passes == 9);
        CHECK(config.seed == 99);

        const FieldLayout layout = layout_from_config(config);
        CHECK(layout.n() == 8);
        CHECK(treatment_count_from_config(config, layout) == 4);
        const NetworkGraph g = graph_from_config(config, layout);
        CHECK(g.directed);
    }
    SUBCASE("defaults describe the 14x6 field") {
        std::ofstream(path) << "seed = 7\n";
        const RunConfig config = load_run_config(path);
        const FieldLayout layout = layout_from_config(config);
        CHECK(layout.n() == 84);
        CHECK(treatment_count_from_config(config, layout) == 21);
    }
    SUBCASE("unknown key") {
        std::ofstream(path) << "rowz = 4\n";
        CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("rowz"),
                             fieldnet::ParseError);
    }
    SUBCASE("malformed line") {
        std::ofstream(path) << "rows\n";
        CHECK_THROWS_AS(load_run_config(path), fieldnet::ParseError);
    }
}

TEST_CASE("evaluate_table") {
    const FieldLayout layout = field_14x6();
    const NetworkGraph king = build_king_graph(layout);
    const std::vector<std::pair<std::string, Design>> designs = {
        {"a", equireplicated_design(84, 21, 11)},
        {"b", equireplicated_design(84, 21, 12)},
    };

    SUBCASE("single CRM cell is 105") {
        const EvaluationReport report =
            evaluate_table({designs[0]}, layout, nullptr, {model_from_name("CRM")});
        REQUIRE(report.phi.size() == 1);
        CHECK(report.phi[0][0] == doctest::Approx(105.0).epsilon(1e-12));
        CHECK(report.efficiency[0][0] == doctest::Approx(1.0));
    }
    SUBCASE("cells match evaluate_design and efficiencies are column-relative") {
        const std::vector<ModelSpec> models = {model_from_name("CRM"), model_from_name("BNM"),
                                               model_from_name("BRCNM")};
        const EvaluationReport report = evaluate_table(designs, layout, &king, models);
        for (std::size_t d = 0; d < designs.size(); ++d)
            for (std::size_t mdl = 0; mdl < models.size(); ++mdl) {
                const double direct =
                    evaluate_design(models[mdl], layout,
                                    models[mdl].include_network ? &king : nullptr,
                                    designs[d].second)
                        .phi;
                CHECK(report.phi[d][mdl] == doctest::Approx(direct).epsilon(1e-12));
            }
        for (std::size_t mdl = 0; mdl < models.size(); ++mdl) {
            const double best = std::min(report.phi[0][mdl], report.phi[1][mdl]);
            for (std::size_t d = 0; d < designs.size(); ++d)
                CHECK(report.efficiency[d][mdl] ==
                      doctest::Approx(best / report.phi[d][mdl]).epsilon(1e-12));
        }
    }
    SUBCASE("network model without a graph is a configuration error") {
        CHECK_THROWS_AS(evaluate_table(designs, layout, nullptr, {model_from_name("LNM")}),
                        ConfigError);
    }
    SUBCASE("inestimable cells render as inf and do not stop the run") {
        auto broken = designs;
        for (int& t : broken[0].second.assignment)
            if (t == 21) t = 1;
        const EvaluationReport report =
            evaluate_table(broken, layout, nullptr, {model_from_name("CRM")});
        CHECK(std::isinf(report.phi[0][0]));
        CHECK(report.efficiency[0][0] == 0.0);
        CHECK(std::isfinite(report.phi[1][0]));
        const std::string json = render_report_json(report, broken, layout);
        CHECK(json.find("\"inf\"") != std::string::npos);
    }
    SUBCASE("report JSON bytes are deterministic apart from the timestamp") {
        const EvaluationReport r1 =
            evaluate_table(designs, layout, &king, {model_from_name("BNM")});
        const EvaluationReport r2 =
            evaluate_table(designs, layout, &king, {model_from_name("BNM")});
        CHECK(r1.phi == r2.phi);
        const std::string j1 = render_report_json(r1, designs, layout);
        const std::string j2 = render_report_json(r2, designs, layout);
        const auto strip_meta = [](const std::string& s) {
            return s.substr(s.find("\"phi_table\""));
        };
        CHECK(strip_meta(j1) == strip_meta(j2));
    }
}

TEST_CASE("cli end to end") {
    TempDir dir;
    const std::string design_path = (dir.path / "d.csv").string();
    const std::string graph_path = (dir.path / "king.graph").string();
    const std::string report_path = (dir.path / "r.json").string();

    // Small field so generate converges instantly: 4x2, two blocks of four.
    const std::vector<std::string> layout_flags = {"--rows", "4",   "--cols",      "2",
                                                   "--superrows", "2,2", "--supercols", "2"};

    SUBCASE("generate, evaluate, compare") {
        std::vector<std::string> gen = {"generate", "--model", "LNM",  "--graph",
                                        "king",     "--mode",  "equal_replicated", "--seed",
                                        "7",        "--restarts", "3",  "--treatments", "2",
                                        "--out",    design_path, "--report", report_path};
        gen.insert(gen.end(), layout_flags.begin(), layout_flags.end());
        CHECK(run_cli(gen) == 0);
        CHECK(std::filesystem::exists(design_path));
        CHECK(std::filesystem::exists(report_path));

        std::vector<std::string> eval = {"evaluate", design_path, "--models", "CRM,LNM",
                                         "--graph", "king", "--out",
                                         (dir.path / "table.json").string()};
        eval.insert(eval.end(), layout_flags.begin(), layout_flags.end());
        CHECK(run_cli(eval) == 0);
        CHECK(std::filesystem::exists(dir.path / "table.json"));

        std::vector<std::string> cmp = {"compare", "--model", "LNM", "--graph", "king",
                                        design_path, design_path};
        cmp.insert(cmp.end(), layout_flags.begin(), layout_flags.end());
        CHECK(run_cli(cmp) == 0);
    }
    SUBCASE("graph subcommand writes a loadable file") {
        std::vector<std::string> graph = {"graph", "--type", "farmer", "--out", graph_path};
        graph.insert(graph.end(), layout_flags.begin(), layout_flags.end());
        CHECK(run_cli(graph) == 0);
        const NetworkGraph g = load_graph(graph_path);
        CHECK(g.n == 8);
        CHECK(g.directed);
    }
    SUBCASE("usage errors exit with 1") {
        CHECK(run_cli({"evaluate"}) == 1);                          // no designs
        CHECK(run_cli({"generate", "--model", "NOPE"}) == 1);       // unknown model
        CHECK(run_cli({"graph", "--type", "king"}) == 1);           // missing --out
        CHECK(run_cli({"bogus"}) == 1);                             // unknown subcommand
    }
    SUBCASE("config file drives the run and flags override it") {
        const auto conf = dir.path / "run.conf";
        std::ofstream(conf) << "rows = 4\ncols = 2\nsuperrows = 2,2\nsupercols = 2\n"
                            << "model = CRM\nmode = equal_replicated\nrestarts = 2\nseed = 5\n";
        CHECK(run_cli({"generate", "--config", conf.string(), "--out", design_path}) == 0);
        const Design d = read_design(design_path);
        CHECK(d.assignment.size() == 8);
    }
}
