#include "fieldnet/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fieldnet/criterion.hpp"
#include "fieldnet/errors.hpp"
#include "fieldnet/io.hpp"
#include "fieldnet/layout.hpp"
#include "fieldnet/model.hpp"
#include "fieldnet/network.hpp"
#include "fieldnet/optimizer.hpp"

namespace fieldnet {

namespace {

struct CommonOptions {
    RunConfig config;

    FieldLayout layout() const { return layout_from_config(config); }

    std::optional<NetworkGraph> graph_if_needed(const std::vector<ModelSpec>& models,
                                                const FieldLayout& layout) const {
        const bool needed = std::any_of(models.begin(), models.end(),
                                        [](const ModelSpec& s) { return s.include_network; });
        if (!needed) return std::nullopt;
        return graph_from_config(config, layout);
    }
};

void add_layout_options(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--rows", config.rows, "Global row count");
    cmd->add_option("--cols", config.cols, "Global column count");
    cmd->add_option("--superrows", config.superrows, "Rows per superrow, comma separated")
        ->delimiter(',');
    cmd->add_option("--supercols", config.supercols, "Columns per supercolumn, comma separated")
        ->delimiter(',');
    cmd->add_option("--row-spacing", config.row_spacing_m, "Row centre spacing in metres");
    cmd->add_option("--col-spacing", config.col_spacing_m, "Column centre spacing in metres");
}

void add_graph_options(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--graph", config.graph, "Graph source: king, farmer, or an edge-list file");
    cmd->add_option("--drill", config.drill_direction, "Drilling pass direction: down or up");
    cmd->add_option("--spray", config.spray_direction, "Spraying pass direction: right or left");
}

std::string find_config_path(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw RunError("cannot write file: " + path.string());
    out << content;
    if (!out) throw RunError("write failed: " + path.string());
}

int run_generate(const CommonOptions& opts, const std::string& out_path,
                 const std::string& report_path) {
    const FieldLayout layout = opts.layout();
    const ModelSpec spec = model_from_name(opts.config.model);
    const int m = treatment_count_from_config(opts.config, layout);

    OptimizerConfig oc;
    oc.mode = mode_from_name(opts.config.mode);
    oc.n_restarts = opts.config.restarts;
    oc.max_passes = opts.config.max_passes;
    oc.seed = opts.config.seed;

    std::optional<NetworkGraph> graph = opts.graph_if_needed({spec}, layout);
    const NetworkGraph* graph_ptr = graph ? &*graph : nullptr;

    const OptimizerResult result = optimize(spec, layout, graph_ptr, m, oc);
    const CriterionResult check = evaluate_design(spec, layout, graph_ptr, result.best_design);

    write_design(result.best_design, layout, out_path);
    std::cout << "model " << model_name(spec) << ", mode " << mode_name(oc.mode) << ", graph "
              << (graph ? graph->label : std::string("none")) << ", seed " << oc.seed << "\n"
              << "best phi = " << std::setprecision(12) << result.best_phi << " ("
              << result.evaluations << " evaluations, " << oc.n_restarts << " restarts)\n"
              << "design written to " << out_path << "\n";

    if (!report_path.empty()) {
        nlohmann::ordered_json j;
        j["meta"] = {{"model", model_name(spec)},
                     {"mode", mode_name(oc.mode)},
                     {"graph", graph ? graph->label : "none"},
                     {"seed", oc.seed},
                     {"restarts", oc.n_restarts},
                     {"max_passes", oc.max_passes},
                     {"treatments", m}};
        j["result"] = {{"best_phi", result.best_phi},
                       {"per_restart_phi", result.per_restart_phi},
                       {"passes_used", result.passes_used},
                       {"evaluations", result.evaluations}};
        j["criterion"] = {{"phi", check.phi}, {"estimable", check.estimable}};
        write_text_file(report_path, j.dump(2) + "\n");
        std::cout << "report written to " << report_path << "\n";
    }
    return 0;
}

int run_evaluate(const CommonOptions& opts, const std::vector<std::string>& design_paths,
                 const std::vector<std::string>& model_names, const std::string& out_path) {
    const FieldLayout layout = opts.layout();

    std::vector<ModelSpec> models;
    if (model_names.empty()) models = all_models();
    else
        for (const std::string& name : model_names) models.push_back(model_from_name(name));

    std::vector<std::pair<std::string, Design>> designs;
    for (const std::string& path : design_paths)
        designs.emplace_back(std::filesystem::path(path).stem().string(),
                             read_design(path, layout));

    std::optional<NetworkGraph> graph = opts.graph_if_needed(models, layout);
    const EvaluationReport report =
        evaluate_table(designs, layout, graph ? &*graph : nullptr, models);

    std::cout << render_report_text(report);
    if (!out_path.empty()) {
        write_text_file(out_path, render_report_json(report, designs, layout));
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

int run_compare(const CommonOptions& opts, const std::string& model,
                const std::string& path_a, const std::string& path_b) {
    const FieldLayout layout = opts.layout();
    const ModelSpec spec = model_from_name(model);
    std::optional<NetworkGraph> graph = opts.graph_if_needed({spec}, layout);
    const NetworkGraph* graph_ptr = graph ? &*graph : nullptr;

    const double phi_a = evaluate_design(spec, layout, graph_ptr, read_design(path_a, layout)).phi;
    const double phi_b = evaluate_design(spec, layout, graph_ptr, read_design(path_b, layout)).phi;
    if (!std::isfinite(phi_a))
        throw RunError(path_a + " is inestimable under model " + model_name(spec));
    if (!std::isfinite(phi_b))
        throw RunError(path_b + " is inestimable under model " + model_name(spec));

    std::cout << std::setprecision(12) << "phi(" << path_a << ") = " << phi_a << "\n"
              << "phi(" << path_b << ") = " << phi_b << "\n"
              << "Eff = " << relative_efficiency(phi_a, phi_b) << "\n";
    return 0;
}

int run_graph(const CommonOptions& opts, const std::string& type, const std::string& out_path) {
    const FieldLayout layout = opts.layout();
    NetworkGraph graph;
    if (type == "king") graph = build_king_graph(layout);
    else if (type == "farmer")
        graph = build_farmer_graph(layout, drill_direction_from_name(opts.config.drill_direction),
                                   spray_direction_from_name(opts.config.spray_direction));
    else throw ConfigError("unknown graph type '" + type + "' (valid: king, farmer)");
    save_graph(graph, out_path);
    std::cout << graph.label << " graph with " << graph.n << " vertices written to " << out_path
              << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Construct, evaluate and optimize field-experiment designs with complex "
                 "blocking and network interference"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string config_path;
    try {
        config_path = find_config_path(argc, argv);
        if (!config_path.empty()) opts.config = load_run_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    app.add_option("--config", config_path, "Flat key = value configuration file");

    auto* generate = app.add_subcommand("generate", "Search for an optimal design");
    generate->fallthrough(true);
    std::string out_design = "design.csv";
    std::string report_path;
    generate->add_option("--model", opts.config.model, "Model name (CRM..BRCNM)");
    generate->add_option("--mode", opts.config.mode,
                         "resolved, equal_replicated or unrestricted");
    generate->add_option("--seed", opts.config.seed, "Random seed");
    generate->add_option("--restarts", opts.config.restarts, "Number of random restarts");
    generate->add_option("--max-passes", opts.config.max_passes, "Pass budget per restart");
    generate->add_option("--treatments", opts.config.treatments,
                         "Treatment count (0 = one replicate per block)");
    generate->add_option("--out", out_design, "Design CSV output path");
    generate->add_option("--report", report_path, "JSON result output path");
    add_graph_options(generate, opts.config);
    add_layout_options(generate, opts.config);

    auto* evaluate = app.add_subcommand("evaluate", "Tabulate phi for designs under models");
    evaluate->fallthrough(true);
    std::vector<std::string> design_paths;
    std::vector<std::string> model_names;
    std::string out_report = "report.json";
    evaluate->add_option("designs", design_paths, "Design CSV files")->required()->expected(-1);
    evaluate->add_option("--models", model_names, "Models to evaluate (default: all eight)")
        ->delimiter(',');
    evaluate->add_option("--out", out_report, "JSON report output path ('' to skip)");
    add_graph_options(evaluate, opts.config);
    add_layout_options(evaluate, opts.config);

    auto* compare = app.add_subcommand("compare", "Relative efficiency of two designs");
    compare->fallthrough(true);
    std::string compare_model;
    std::vector<std::string> compare_paths;
    compare->add_option("--model", compare_model, "Model name")->required();
    compare->add_option("designs", compare_paths, "Two design CSV files")->required()
        ->expected(2);
    add_graph_options(compare, opts.config);
    add_layout_options(compare, opts.config);

    auto* graph_cmd = app.add_subcommand("graph", "Build and save a connectivity graph");
    graph_cmd->fallthrough(true);
    std::string graph_type = "king";
    std::string graph_out;
    graph_cmd->add_option("--type", graph_type, "king or farmer")->required();
    graph_cmd->add_option("--out", graph_out, "Edge-list output path")->required();
    add_graph_options(graph_cmd, opts.config);
    add_layout_options(graph_cmd, opts.config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(generate)) return run_generate(opts, out_design, report_path);
        if (app.got_subcommand(evaluate))
            return run_evaluate(opts, design_paths, model_names, out_report);
        if (app.got_subcommand(compare))
            return run_compare(opts, compare_model, compare_paths[0], compare_paths[1]);
        if (app.got_subcommand(graph_cmd)) return run_graph(opts, graph_type, graph_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fieldnet::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace fieldnet
