#ifndef SQSTAT_IO_HPP
#define SQSTAT_IO_HPP

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sqstat/ensemble.hpp"
#include "sqstat/error.hpp"
#include "sqstat/fluctuation.hpp"
#include "sqstat/models.hpp"
#include "sqstat/spectrum.hpp"
#include "sqstat/squeeze.hpp"
#include "sqstat/thermo_state.hpp"

namespace sqstat::io {

using json = nlohmann::json;

// 17 significant digits; non-finite values as nan / inf / -inf.
inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON has no infinities; they are written as null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- squeeze config ------------------------------------------------------

inline SqueezeFamily squeeze_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("family")) throw config_error("squeeze: expected {\"family\": ...}");
    const auto family = j.at("family").get<std::string>();
    if (family == "identity") return SqueezeFamily::identity();
    if (family == "tsallis") {
        if (!j.contains("q") || !j.at("q").is_number()) throw config_error("squeeze: tsallis needs a numeric q");
        return SqueezeFamily::tsallis(j.at("q").get<double>());
    }
    throw config_error("squeeze: unknown family '" + family + "' (custom families are code-level only)");
}

inline json squeeze_to_json(const SqueezeFamily& fam)
{
    if (fam.kind() == SqueezeKind::custom) return json{{"family", fam.name()}};
    if (fam.kind() == SqueezeKind::identity) return json{{"family", "identity"}};
    return json{{"family", "tsallis"}, {"q", fam.q()}};
}

// ---- model files ---------------------------------------------------------

struct VariableDecl {
    std::string name;
    bool exchanged = true;
};

struct ModelFile {
    std::vector<VariableDecl> variables;
    // Rows over every declared variable, in declaration order.
    DegeneracySpectrum spectrum;
    EnsembleSpec environment;
    std::optional<SqueezeFamily> squeeze;
    // Set when the rows were generated by a built-in model.
    std::optional<ModelDescriptor> builtin;

    std::vector<std::string> exchanged() const
    {
        std::vector<std::string> out;
        for (const auto& v : variables) {
            if (v.exchanged) out.push_back(v.name);
        }
        return out;
    }

    // The spectrum with every fixed variable pinned at environment.X.
    DegeneracySpectrum open_spectrum() const
    {
        DegeneracySpectrum s = spectrum;
        for (const auto& v : variables) {
            if (v.exchanged) continue;
            auto it = environment.X.find(v.name);
            if (it == environment.X.end()) {
                throw config_error("fixed variable '" + v.name + "' has no value in environment.X");
            }
            s = restrict_to(s, v.name, it->second);
        }
        return s;
    }
};

namespace detail {

inline std::map<std::string, double> number_map(const json& j, const std::string& where)
{
    std::map<std::string, double> out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw config_error(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw config_error(where + "." + k + " must be a number");
        out[k] = v.get<double>();
    }
    return out;
}

}  // namespace detail

inline ModelFile model_from_json(const json& j)
{
    if (!j.is_object()) throw config_error("model file must be a JSON object");
    ModelFile m;
    try {
        if (!j.contains("variables") || !j.at("variables").is_array()) {
            throw config_error("model: 'variables' must be an array");
        }
        for (const auto& v : j.at("variables")) {
            VariableDecl d;
            d.name = v.at("name").get<std::string>();
            const auto kind = v.value("kind", std::string("exchanged"));
            if (kind != "exchanged" && kind != "fixed") {
                throw config_error("variable '" + d.name + "': kind must be exchanged or fixed");
            }
            d.exchanged = kind == "exchanged";
            m.variables.push_back(d);
            m.spectrum.variable_names.push_back(d.name);
        }
        if (!j.contains("rows") || !j.at("rows").is_array()) throw config_error("model: 'rows' must be an array");
        for (const auto& r : j.at("rows")) {
            SpectrumRow row;
            row.x = r.at("x").get<std::vector<double>>();
            if (r.contains("g")) row.count = r.at("g").get<double>();
            if (r.contains("ln_g")) {
                row.ln_g = r.at("ln_g").get<double>();
            } else if (row.count) {
                row.ln_g = std::log(*row.count);
            } else {
                throw config_error("model row needs ln_g or g");
            }
            m.spectrum.rows.push_back(std::move(row));
        }
        if (j.contains("environment")) {
            const auto& env = j.at("environment");
            m.environment.y = detail::number_map(env.value("y", json(nullptr)), "environment.y");
            m.environment.X = detail::number_map(env.value("X", json(nullptr)), "environment.X");
        }
        if (j.contains("squeeze")) m.squeeze = squeeze_from_json(j.at("squeeze"));
        if (j.contains("builtin")) {
            const auto& b = j.at("builtin");
            m.builtin = describe_model(b.at("name").get<std::string>(),
                                       detail::number_map(b.value("parameters", json(nullptr)), "builtin.parameters"));
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("model file: ") + e.what());
    }
    m.spectrum.validate();
    return m;
}

inline json model_to_json(const ModelFile& m)
{
    json j;
    j["variables"] = json::array();
    for (const auto& v : m.variables) {
        j["variables"].push_back({{"name", v.name}, {"kind", v.exchanged ? "exchanged" : "fixed"}});
    }
    j["rows"] = json::array();
    for (const auto& r : m.spectrum.rows) {
        json row{{"x", r.x}, {"ln_g", r.ln_g}};
        if (r.count) row["g"] = *r.count;
        j["rows"].push_back(std::move(row));
    }
    j["environment"] = {{"y", m.environment.y}, {"X", m.environment.X}};
    if (m.squeeze) j["squeeze"] = squeeze_to_json(*m.squeeze);
    if (m.builtin) j["builtin"] = {{"name", m.builtin->name}, {"parameters", m.builtin->parameters}};
    return j;
}

inline ModelFile model_from_builtin(const ModelDescriptor& d)
{
    ModelFile m;
    m.spectrum = build_spectrum(d);
    for (const auto& n : m.spectrum.variable_names) m.variables.push_back({n, true});
    m.builtin = d;
    return m;
}

// ---- thermodynamic reports ----------------------------------------------

inline json thermo_to_json(const ThermoPoint& p, double ln_characteristic_class)
{
    json j;
    j["phi"] = p.phi;
    j["entropy_J"] = p.entropy_J;
    j["entropy_theta"] = p.entropy_theta ? json(*p.entropy_theta) : json(nullptr);
    j["entropy_closed"] = p.entropy_closed;
    j["ln_characteristic_class"] = ln_characteristic_class;
    j["observed"] = json::object();
    for (const auto& [k, v] : p.observed) j["observed"][k] = number(v);
    j["variables"] = json::array();
    for (const auto& v : p.variables) {
        j["variables"].push_back(
            {{"name", v.name}, {"extensive", number(v.extensive_value)}, {"intensive", number(v.intensive_value)}});
    }
    return j;
}

inline std::vector<std::string> thermo_csv_header(const ThermoPoint& p)
{
    std::vector<std::string> h{"phi", "entropy_J", "entropy_theta", "entropy_closed", "ln_characteristic_class"};
    for (const auto& [k, v] : p.observed) h.push_back("observed_" + k);
    return h;
}

inline std::vector<std::string> thermo_csv_row(const ThermoPoint& p, double ln_characteristic_class)
{
    std::vector<std::string> r{format_number(p.phi), format_number(p.entropy_J),
                               p.entropy_theta ? format_number(*p.entropy_theta) : "",
                               format_number(p.entropy_closed), format_number(ln_characteristic_class)};
    for (const auto& [k, v] : p.observed) r.push_back(format_number(v));
    return r;
}

inline void write_csv_line(std::ostream& os, const std::vector<std::string>& cells)
{
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) os << ',';
        os << cells[k];
    }
    os << '\n';
}

// One line per spectrum row: x..., ln_g, ln_class, macro_prob, config_prob,
// boltzmann_factor. Excluded rows have an empty ln_class.
inline void write_row_table(std::ostream& os, const DegeneracySpectrum& spec, const EnsembleSpec& env,
                            const SqueezeFamily& fam)
{
    const auto table = characteristic_class(spec, env, fam);
    const auto probs = probabilities(table, spec, fam);
    std::vector<std::string> head = spec.variable_names;
    for (const char* c : {"ln_g", "ln_class", "macro_prob", "config_prob", "boltzmann_factor"}) head.push_back(c);
    write_csv_line(os, head);
    for (std::size_t r = 0; r < spec.rows.size(); ++r) {
        std::vector<std::string> cells;
        for (double x : spec.rows[r].x) cells.push_back(format_number(x));
        cells.push_back(format_number(spec.rows[r].ln_g));
        cells.push_back(table.rows[r].cutoff ? "" : format_number(table.rows[r].ln_x));
        cells.push_back(format_number(probs.macro_probs[r]));
        cells.push_back(format_number(probs.config_probs[r]));
        cells.push_back(format_number(generalized_boltzmann_factor(spec, env, fam, r).value));
        write_csv_line(os, cells);
    }
}

// ---- fluctuation reports -------------------------------------------------

inline json matrix_to_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json fluctuation_to_json(const StabilityMatrix& stab, const FluctuationReport& r)
{
    json j;
    j["variables"] = r.variables;
    j["hessian"] = matrix_to_json(stab.hessian);
    j["stable"] = stab.stable;
    j["G"] = matrix_to_json(r.G);
    j["G_inv"] = matrix_to_json(r.G_inv);
    j["alpha_alpha"] = matrix_to_json(r.alpha_alpha);
    j["lambda_lambda"] = matrix_to_json(r.lambda_lambda);
    j["variances"] = json::object();
    for (const auto& [k, v] : r.variances) j["variances"][k] = number(v);
    j["conjugate_variances"] = json::object();
    for (const auto& [k, v] : r.conjugate_variances) j["conjugate_variances"][k] = number(v);
    j["covariances"] = json::array();
    for (const auto& [k, v] : r.covariances) {
        j["covariances"].push_back({{"a", k.first}, {"b", k.second}, {"value", number(v)}});
    }
    j["tsallis_scale"] = r.tsallis_scale;
    j["condition_number"] = number(r.condition_number);
    j["flagged"] = r.flagged;
    j["warnings"] = r.warnings;
    return j;
}

// matrix,row,<variables...> for hessian, alpha_alpha and lambda_lambda.
inline void write_fluctuation_csv(std::ostream& os, const StabilityMatrix& stab, const FluctuationReport& r)
{
    std::vector<std::string> head{"matrix", "row"};
    head.insert(head.end(), r.variables.begin(), r.variables.end());
    write_csv_line(os, head);
    const std::pair<const char*, const Eigen::MatrixXd*> mats[] = {
        {"hessian", &stab.hessian}, {"alpha_alpha", &r.alpha_alpha}, {"lambda_lambda", &r.lambda_lambda}};
    for (const auto& [name, m] : mats) {
        for (Eigen::Index i = 0; i < m->rows(); ++i) {
            std::vector<std::string> cells{name, r.variables[static_cast<std::size_t>(i)]};
            for (Eigen::Index k = 0; k < m->cols(); ++k) cells.push_back(format_number((*m)(i, k)));
            write_csv_line(os, cells);
        }
    }
}

// ---- CSV input -----------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace detail

// Numeric CSV whose header must equal `columns`; returns one vector per
// column. Blank lines and lines starting with '#' are skipped.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::vector<std::string>& columns)
{
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<std::vector<double>> cols(columns.size());
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto cells = detail::split(t);
        if (!header) {
            if (cells != columns) {
                std::string want;
                for (const auto& c : columns) want += (want.empty() ? "" : ",") + c;
                throw config_error("CSV header must be '" + want + "' (line " + std::to_string(lineno) + ")");
            }
            header = true;
            continue;
        }
        if (cells.size() != columns.size()) {
            throw config_error("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(columns.size()) +
                               " fields");
        }
        for (std::size_t k = 0; k < cells.size(); ++k) {
            try {
                std::size_t used = 0;
                cols[k].push_back(std::stod(cells[k], &used));
                if (used != cells[k].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw config_error("CSV line " + std::to_string(lineno) + ": '" + cells[k] + "' is not a number");
            }
        }
    }
    if (!header) throw config_error("CSV input is empty");
    return cols;
}

}  // namespace sqstat::io

#endif  // SQSTAT_IO_HPP
