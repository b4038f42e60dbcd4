#include "fieldnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "fieldnet/criterion.hpp"
#include "fieldnet/errors.hpp"

namespace fieldnet {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep)) out.push_back(trim(field));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

long parse_long(const std::string& field, const std::string& what, long line_no) {
    try {
        std::size_t used = 0;
        const long value = std::stol(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return value;
    } catch (const std::exception&) {
        throw ParseError("cannot parse " + what + " from '" + field + "'", line_no);
    }
}

struct DesignRow {
    int plot, row, col, treatment;
};

std::vector<DesignRow> read_design_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RunError("cannot open design file: " + path.string());

    std::string line;
    long line_no = 0;
    bool header_seen = false;
    std::vector<DesignRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::vector<std::string> fields = split(t, ',');
        if (!header_seen) {
            if (fields.size() < 4 || fields[0] != "plot" || fields[1] != "global_row" ||
                fields[2] != "global_col" || fields[3] != "treatment")
                throw ParseError("expected header 'plot,global_row,global_col,treatment'", line_no);
            header_seen = true;
            continue;
        }
        if (fields.size() < 4)
            throw ParseError("expected at least 4 comma-separated fields", line_no);
        DesignRow row;
        row.plot = static_cast<int>(parse_long(fields[0], "plot id", line_no));
        row.row = static_cast<int>(parse_long(fields[1], "global_row", line_no));
        row.col = static_cast<int>(parse_long(fields[2], "global_col", line_no));
        row.treatment = static_cast<int>(parse_long(fields[3], "treatment", line_no));
        rows.push_back(row);
    }
    if (!header_seen) throw ParseError("missing design header", line_no);
    if (rows.empty()) throw ParseError("design file has no plot rows", line_no);
    return rows;
}

Design design_from_rows(const std::vector<DesignRow>& rows, const FieldLayout* layout) {
    const int n = layout ? layout->n() : static_cast<int>(rows.size());
    std::vector<int> assignment(n, 0);
    std::vector<bool> seen(n, false);
    for (const DesignRow& row : rows) {
        if (row.plot < 1 || row.plot > n)
            throw ConfigError("plot id " + std::to_string(row.plot) + " outside 1.." +
                              std::to_string(n));
        if (seen[row.plot - 1])
            throw ConfigError("duplicate plot " + std::to_string(row.plot));
        seen[row.plot - 1] = true;
        if (row.treatment < 1)
            throw ConfigError("plot " + std::to_string(row.plot) + " has treatment " +
                              std::to_string(row.treatment) + ", below 1");
        if (layout) {
            const FactorLabels f = unit_factors(*layout, row.plot);
            if (f.global_row != row.row || f.global_col != row.col)
                throw ConfigError("plot " + std::to_string(row.plot) + " is listed at (" +
                                  std::to_string(row.row) + "," + std::to_string(row.col) +
                                  ") but the layout places it at (" +
                                  std::to_string(f.global_row) + "," +
                                  std::to_string(f.global_col) + ")");
        }
        assignment[row.plot - 1] = row.treatment;
    }
    for (int plot = 1; plot <= n; ++plot)
        if (!seen[plot - 1]) throw ConfigError("missing plot " + std::to_string(plot));

    Design design;
    design.assignment = std::move(assignment);
    design.m = *std::max_element(design.assignment.begin(), design.assignment.end());
    return design;
}

}  // namespace

Design read_design(const std::filesystem::path& path) {
    return design_from_rows(read_design_rows(path), nullptr);
}

Design read_design(const std::filesystem::path& path, const FieldLayout& layout) {
    return design_from_rows(read_design_rows(path), &layout);
}

void write_design(const Design& design, const FieldLayout& layout,
                  const std::filesystem::path& path) {
    validate_design(design, layout.n());
    std::ofstream out(path);
    if (!out) throw RunError("cannot write design file: " + path.string());
    out << "plot,global_row,global_col,treatment,superrow,supercol,block\n";
    for (int plot = 1; plot <= layout.n(); ++plot) {
        const FactorLabels f = unit_factors(layout, plot);
        out << plot << ',' << f.global_row << ',' << f.global_col << ','
            << design.assignment[plot - 1] << ',' << f.superrow << ',' << f.supercol << ','
            << f.block << '\n';
    }
    if (!out) throw RunError("write failed: " + path.string());
}

namespace {

std::vector<int> parse_int_list(const std::string& value, const std::string& key) {
    std::vector<int> out;
    for (const std::string& field : split(value, ',')) {
        if (field.empty()) throw ConfigError("empty entry in list for key '" + key + "'");
        out.push_back(static_cast<int>(parse_long(field, key, -1)));
    }
    if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
    return out;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RunError("cannot open config file: " + path.string());

    RunConfig config;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got '" + t + "'", line_no);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("expected 'key = value', got '" + t + "'", line_no);

        if (key == "rows") config.rows = static_cast<int>(parse_long(value, key, line_no));
        else if (key == "cols") config.cols = static_cast<int>(parse_long(value, key, line_no));
        else if (key == "superrows") config.superrows = parse_int_list(value, key);
        else if (key == "supercols") config.supercols = parse_int_list(value, key);
        else if (key == "row_spacing_m") config.row_spacing_m = std::stod(value);
        else if (key == "col_spacing_m") config.col_spacing_m = std::stod(value);
        else if (key == "model") config.model = value;
        else if (key == "graph") config.graph = value;
        else if (key == "drill_direction") config.drill_direction = value;
        else if (key == "spray_direction") config.spray_direction = value;
        else if (key == "mode") config.mode = value;
        else if (key == "treatments") config.treatments = static_cast<int>(parse_long(value, key, line_no));
        else if (key == "restarts") config.restarts = static_cast<int>(parse_long(value, key, line_no));
        else if (key == "max_passes") config.max_passes = static_cast<int>(parse_long(value, key, line_no));
        else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_long(value, key, line_no));
        else throw ParseError("unknown config key '" + key + "'", line_no);
    }
    return config;
}

FieldLayout layout_from_config(const RunConfig& config) {
    return build_layout(config.rows, config.cols, config.superrows, config.supercols,
                        config.row_spacing_m, config.col_spacing_m);
}

int treatment_count_from_config(const RunConfig& config, const FieldLayout& layout) {
    if (config.treatments > 0) return config.treatments;
    const int blocks = layout.n_blocks();
    if (layout.n() % blocks != 0)
        throw ConfigError("treatments not set and block sizes are unequal; set 'treatments'");
    const int block_size = layout.superrow_sizes[0] * layout.supercol_sizes[0];
    for (int sr : layout.superrow_sizes)
        for (int sc : layout.supercol_sizes)
            if (sr * sc != block_size)
                throw ConfigError("treatments not set and block sizes are unequal; set 'treatments'");
    return block_size;
}

NetworkGraph graph_from_config(const RunConfig& config, const FieldLayout& layout) {
    if (config.graph == "king") return build_king_graph(layout);
    if (config.graph == "farmer")
        return build_farmer_graph(layout, drill_direction_from_name(config.drill_direction),
                                  spray_direction_from_name(config.spray_direction));
    NetworkGraph g = load_graph(config.graph);
    if (g.n != layout.n())
        throw ConfigError("graph file has " + std::to_string(g.n) +
                          " vertices but the layout has " + std::to_string(layout.n()) + " units");
    return g;
}

EvaluationReport evaluate_table(const std::vector<std::pair<std::string, Design>>& designs,
                                const FieldLayout& layout, const NetworkGraph* graph,
                                const std::vector<ModelSpec>& models) {
    if (designs.empty()) throw ConfigError("evaluate_table needs at least one design");
    if (models.empty()) throw ConfigError("evaluate_table needs at least one model");
    for (const auto& [name, design] : designs) validate_design(design, layout.n());
    for (const ModelSpec& spec : models)
        if (spec.include_network && graph == nullptr)
            throw ConfigError("model " + model_name(spec) + " needs a network graph");

    EvaluationReport report;
    report.graph_label = graph ? graph->label : "none";
    for (const auto& [name, design] : designs) report.design_names.push_back(name);
    for (const ModelSpec& spec : models) report.model_names.push_back(model_name(spec));

    report.phi.assign(designs.size(), std::vector<double>(models.size(), kInestimable));
    for (std::size_t d = 0; d < designs.size(); ++d)
        for (std::size_t mdl = 0; mdl < models.size(); ++mdl)
            report.phi[d][mdl] =
                evaluate_design(models[mdl], layout,
                                models[mdl].include_network ? graph : nullptr,
                                designs[d].second)
                    .phi;

    report.efficiency.assign(designs.size(), std::vector<double>(models.size(), 0.0));
    for (std::size_t mdl = 0; mdl < models.size(); ++mdl) {
        double best = kInestimable;
        for (std::size_t d = 0; d < designs.size(); ++d)
            best = std::min(best, report.phi[d][mdl]);
        for (std::size_t d = 0; d < designs.size(); ++d) {
            const double phi = report.phi[d][mdl];
            report.efficiency[d][mdl] =
                (std::isfinite(best) && std::isfinite(phi)) ? best / phi : 0.0;
        }
    }
    return report;
}

namespace {

nlohmann::ordered_json phi_cell(double value) {
    if (std::isfinite(value)) return value;
    return "inf";
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%FT%TZ");
    return out.str();
}

}  // namespace

std::string render_report_json(const EvaluationReport& report,
                               const std::vector<std::pair<std::string, Design>>& designs,
                               const FieldLayout& layout) {
    nlohmann::ordered_json j;
    j["meta"] = {
        {"generated_at", timestamp_utc()},
        {"graph", report.graph_label},
        {"layout",
         {{"rows", layout.n_rows},
          {"cols", layout.n_cols},
          {"superrows", layout.superrow_sizes},
          {"supercols", layout.supercol_sizes},
          {"row_spacing_m", layout.row_spacing},
          {"col_spacing_m", layout.col_spacing}}},
        {"tolerances",
         {{"pinv_rel_tol", kPinvRelTol}, {"estimability_rel_tol", kEstimabilityRelTol}}},
    };

    nlohmann::ordered_json phi_table;
    phi_table["rows"] = report.design_names;
    phi_table["columns"] = report.model_names;
    nlohmann::ordered_json phi_values = nlohmann::ordered_json::array();
    for (const auto& row : report.phi) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (double v : row) r.push_back(phi_cell(v));
        phi_values.push_back(r);
    }
    phi_table["values"] = phi_values;
    j["phi_table"] = phi_table;

    nlohmann::ordered_json eff_table;
    eff_table["rows"] = report.design_names;
    eff_table["columns"] = report.model_names;
    eff_table["values"] = report.efficiency;
    j["efficiency_table"] = eff_table;

    nlohmann::ordered_json design_meta = nlohmann::ordered_json::object();
    for (const auto& [name, design] : designs) {
        design_meta[name] = {{"treatments", design.m},
                             {"replications", replication_counts(design)}};
    }
    j["designs"] = design_meta;
    return j.dump(2) + "\n";
}

std::string render_report_text(const EvaluationReport& report) {
    std::size_t name_width = 6;
    for (const auto& name : report.design_names) name_width = std::max(name_width, name.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width) + 2) << "design";
    for (const auto& model : report.model_names)
        out << std::right << std::setw(10) << model;
    out << '\n';
    out << std::setprecision(6);
    for (std::size_t d = 0; d < report.design_names.size(); ++d) {
        out << std::left << std::setw(static_cast<int>(name_width) + 2) << report.design_names[d];
        for (double v : report.phi[d]) {
            out << std::right << std::setw(10);
            if (std::isfinite(v)) out << v;
            else out << "inf";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fieldnet
