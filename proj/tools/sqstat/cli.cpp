#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "sqstat/io.hpp"
#include "sqstat/sqstat.hpp"

namespace sqstat::cli {
namespace {

using io::json;

const char* const exit_code_help =
    "Exit codes:\n"
    "  0  success\n"
    "  1  unexpected failure\n"
    "  2  configuration error (bad flags, unreadable or malformed input files)\n"
    "  3  model validation error (bad model parameters or spectrum)\n"
    "  4  numerical domain error (cutoff-degenerate ensemble, unstable step, ...)\n"
    "On failure an error object {\"error\": {\"kind\", \"message\", \"exit_code\"}} is written to stderr.\n"
    "Set SQSTAT_LOG_LEVEL (trace, debug, info, warn, error, off) to control diagnostics.";

std::shared_ptr<spdlog::logger> make_logger()
{
    auto logger = std::make_shared<spdlog::logger>("sqstat", std::make_shared<spdlog::sinks::stderr_sink_st>());
    logger->set_pattern("[%l] %v");
    const char* env = std::getenv("SQSTAT_LOG_LEVEL");
    logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return logger;
}

// ---- option storage ------------------------------------------------------

struct Common {
    std::string model;
    std::vector<std::string> params;
    std::vector<std::string> y;
    std::vector<std::string> X;
    std::string squeeze;
    std::optional<double> q;
    std::string out;
    std::string format = "json";
    std::string emit_model;
};

struct KineticsOptions {
    int radius = 2;
    std::optional<double> dt;
    long steps = 1000;
    std::string xi = "one";
    long trace_every = 1;
    unsigned long long seed = 1;
    std::string snapshot;
};

struct InferOptions {
    std::string data;
    double threshold = default_power_law_threshold;
    std::string reconstruct;
    std::string density;
    std::vector<double> energies;
};

struct SweepOptions {
    std::string var;
    double from = 0.0;
    double to = 1.0;
    long steps = 11;
};

std::pair<std::string, double> parse_assignment(const std::string& s, const char* flag)
{
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw config_error(std::string(flag) + " expects name=value, got '" + s + "'");
    const std::string name = s.substr(0, eq);
    const std::string value = s.substr(eq + 1);
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return {name, v};
    } catch (const std::exception&) {
        throw config_error(std::string(flag) + " " + name + ": '" + value + "' is not a number");
    }
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items, const char* flag)
{
    std::map<std::string, double> out;
    for (const auto& s : items) {
        auto [k, v] = parse_assignment(s, flag);
        if (!out.emplace(k, v).second) throw config_error(std::string(flag) + " " + k + " given twice");
    }
    return out;
}

void add_common(CLI::App* app, Common& c, bool needs_model)
{
    app->footer(exit_code_help);
    if (needs_model) {
        app->add_option("--model", c.model, "Built-in model name or path to a model JSON file")->required();
        app->add_option("--param", c.params, "Built-in model parameter name=value (repeatable)");
        app->add_option("--y", c.y, "Intensive environment value name=value (repeatable)");
        app->add_option("--X", c.X, "Hold an extensive variable fixed at name=value (repeatable)");
        app->add_option("--emit-model", c.emit_model, "Write the resolved model JSON to this path");
    }
    app->add_option("--squeeze", c.squeeze, "Squeezing family")->check(CLI::IsMember({"identity", "tsallis"}));
    app->add_option("--q", c.q, "Tsallis index");
    app->add_option("--out", c.out, "Output path (default stdout)");
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

SqueezeFamily resolve_squeeze(const Common& c, const std::optional<SqueezeFamily>& from_file)
{
    if (c.squeeze == "identity") {
        if (c.q && *c.q != 1.0) throw config_error("--q is only meaningful with --squeeze tsallis");
        return SqueezeFamily::identity();
    }
    if (c.squeeze == "tsallis") {
        if (!c.q) throw config_error("--squeeze tsallis requires --q");
        return SqueezeFamily::tsallis(*c.q);
    }
    if (c.q) {
        if (from_file && from_file->kind() == SqueezeKind::tsallis) return SqueezeFamily::tsallis(*c.q);
        throw config_error("--q requires --squeeze tsallis");
    }
    return from_file ? *from_file : SqueezeFamily::identity();
}

// ---- model problems ------------------------------------------------------

struct Problem {
    io::ModelFile model;
    SqueezeFamily fam = SqueezeFamily::identity();
    DegeneracySpectrum spectrum;
    EnsembleSpec env;
};

io::ModelFile load_model(const Common& c)
{
    const auto& names = model_names();
    if (std::find(names.begin(), names.end(), c.model) != names.end()) {
        return io::model_from_builtin(describe_model(c.model, parse_assignments(c.params, "--param")));
    }
    if (!c.params.empty()) throw config_error("--param applies only to built-in models");
    std::ifstream in(c.model);
    if (!in) {
        throw config_error("'" + c.model + "' is neither a built-in model nor a readable file (built-ins: two_level, "
                           "spin_half_paramagnet, einstein_solid, lattice_gas)");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("cannot parse model file '" + c.model + "': " + e.what());
    }
    return io::model_from_json(j);
}

Problem build_problem(const Common& c)
{
    Problem p;
    p.model = load_model(c);
    p.fam = resolve_squeeze(c, p.model.squeeze);
    p.model.squeeze = p.fam;

    for (const auto& [k, v] : parse_assignments(c.X, "--X")) {
        auto it = std::find_if(p.model.variables.begin(), p.model.variables.end(),
                               [&](const io::VariableDecl& d) { return d.name == k; });
        if (it == p.model.variables.end()) throw config_error("--X names unknown variable '" + k + "'");
        it->exchanged = false;
        p.model.environment.X[k] = v;
        p.model.environment.y.erase(k);
    }
    for (const auto& [k, v] : parse_assignments(c.y, "--y")) p.model.environment.y[k] = v;

    std::set<std::string> declared;
    for (const auto& d : p.model.variables) declared.insert(d.name);
    for (const auto& [k, v] : p.model.environment.y) {
        if (!declared.contains(k)) throw config_error("--y names unknown variable '" + k + "'");
    }
    for (const auto& [k, v] : p.model.environment.X) {
        if (!declared.contains(k)) throw config_error("environment.X names unknown variable '" + k + "'");
    }
    for (const auto& d : p.model.variables) {
        if (d.exchanged && !p.model.environment.y.contains(d.name)) {
            throw config_error("exchanged variable '" + d.name + "' needs a value: pass --y " + d.name + "=<value>");
        }
        if (!d.exchanged && p.model.environment.y.contains(d.name)) {
            throw config_error("variable '" + d.name + "' is fixed; it cannot also take --y");
        }
    }
    p.spectrum = p.model.open_spectrum();
    p.env = p.model.environment;
    return p;
}

bool uses_model_surface(const Problem& p) { return p.model.builtin && p.env.X.empty(); }

ThermoPoint evaluate(const Problem& p)
{
    if (uses_model_surface(p)) return model_point(*p.model.builtin, p.env, p.fam);
    return phi_and_entropies(p.spectrum, p.env, p.fam);
}

double ln_class_of(const Problem& p) { return characteristic_class(p.spectrum, p.env, p.fam).ln_total; }

// ---- output --------------------------------------------------------------

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw config_error("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

void emit_model(const Common& c, const Problem& p)
{
    if (c.emit_model.empty()) return;
    std::ofstream f(c.emit_model);
    if (!f) throw config_error("cannot open '" + c.emit_model + "' for --emit-model");
    write_json(f, io::model_to_json(p.model));
}

// ---- commands ------------------------------------------------------------

int cmd_compute(const Common& c, std::ostream& out, spdlog::logger& log)
{
    const Problem p = build_problem(c);
    emit_model(c, p);
    const ThermoPoint pt = evaluate(p);
    log.debug("compute: phi = {}", pt.phi);
    Sink sink(c.out, out);
    if (c.format == "csv") {
        io::write_row_table(sink.stream(), p.spectrum, p.env, p.fam);
    } else {
        json j = io::thermo_to_json(pt, ln_class_of(p));
        j["squeeze"] = io::squeeze_to_json(p.fam);
        write_json(sink.stream(), j);
    }
    return exit_ok;
}

int cmd_fluct(const Common& c, std::ostream& out, spdlog::logger& log)
{
    const Problem p = build_problem(c);
    emit_model(c, p);
    const ThermoPoint pt = evaluate(p);
    const auto names = p.spectrum.variable_names;
    if (names.empty()) throw config_error("fluct needs at least one exchanged variable");
    Values at;
    for (const auto& n : names) at[n] = p.env.y.at(n);
    const auto stab = stability_matrix(phi_surface(p.spectrum, p.env, p.fam), at, names);
    const auto rep = moments(stab, pt.phi, p.fam, pt.entropy_theta);
    for (const auto& w : rep.warnings) log.warn("{}", w);
    Sink sink(c.out, out);
    if (c.format == "csv") {
        io::write_fluctuation_csv(sink.stream(), stab, rep);
    } else {
        json j = io::fluctuation_to_json(stab, rep);
        j["phi0"] = pt.phi;
        j["squeeze"] = io::squeeze_to_json(p.fam);
        write_json(sink.stream(), j);
    }
    return exit_ok;
}

int cmd_sweep(const Common& c, const SweepOptions& s, std::ostream& out, spdlog::logger& log)
{
    if (s.steps < 2) throw config_error("--steps must be >= 2 for a sweep");
    Problem p = build_problem(c);
    emit_model(c, p);
    if (!p.env.y.contains(s.var)) throw config_error("--sweep-var must name an exchanged variable, got '" + s.var + "'");
    const auto grid = linear_grid(s.from, s.to, static_cast<std::size_t>(s.steps));
    std::vector<std::pair<ThermoPoint, double>> points;
    for (double v : grid) {
        p.env.y[s.var] = v;
        points.emplace_back(evaluate(p), ln_class_of(p));
        log.debug("sweep {} = {}: phi = {}", s.var, v, points.back().first.phi);
    }
    Sink sink(c.out, out);
    if (c.format == "csv") {
        auto head = io::thermo_csv_header(points.front().first);
        head.insert(head.begin(), s.var);
        io::write_csv_line(sink.stream(), head);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            auto row = io::thermo_csv_row(points[k].first, points[k].second);
            row.insert(row.begin(), io::format_number(grid[k]));
            io::write_csv_line(sink.stream(), row);
        }
    } else {
        json j{{"sweep_var", s.var}, {"squeeze", io::squeeze_to_json(p.fam)}, {"points", json::array()}};
        for (std::size_t k = 0; k < grid.size(); ++k) {
            json pt = io::thermo_to_json(points[k].first, points[k].second);
            pt["value"] = grid[k];
            j["points"].push_back(std::move(pt));
        }
        write_json(sink.stream(), j);
    }
    return exit_ok;
}

int cmd_kinetics(const Common& c, const KineticsOptions& k, std::ostream& out, spdlog::logger& log)
{
    if (k.radius < 1) throw config_error("--lattice-radius must be >= 1");
    if (k.steps < 0) throw config_error("--steps must be >= 0");
    if (k.trace_every < 1) throw config_error("--trace-every must be >= 1");
    const SqueezeFamily fam = resolve_squeeze(c, std::nullopt);
    const auto lattice = VelocityLattice::disk(k.radius);
    const auto net = build_collision_network(lattice);
    const SymmetricHook xi = k.xi == "soft" ? SymmetricHook(xi_soft) : SymmetricHook(xi_one);

    KineticState state;
    std::mt19937_64 rng(k.seed);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    state.F.resize(lattice.size());
    for (double& f : state.F) f = dist(rng);

    const double bound = stable_dt_bound(state, net, fam);
    const double dt = k.dt.value_or(0.5 * bound);
    if (!(dt > 0.0)) throw config_error("--dt must be > 0");
    if (dt > bound) log.warn("dt = {} exceeds the stability bound {}", dt, bound);
    log.info("kinetics: {} velocities, {} collisions, dt = {}", lattice.size(), net.quadruples.size(), dt);

    std::optional<std::ofstream> snap;
    if (!k.snapshot.empty()) {
        snap.emplace(k.snapshot);
        if (!*snap) throw config_error("cannot open snapshot file '" + k.snapshot + "'");
        *snap << "t,vx,vy,F\n";
    }

    struct TraceRow {
        double t, S, mass, energy, max_rhs;
    };
    std::vector<TraceRow> trace;
    auto record = [&] {
        const auto inv = invariants(state, lattice);
        trace.push_back({state.t, entropy_functional(state, fam), inv.mass, inv.energy,
                         max_abs(collision_rhs(state, net, fam, xi))});
        if (snap) {
            for (std::size_t i = 0; i < state.F.size(); ++i) {
                *snap << io::format_number(state.t) << ',' << lattice.velocities[i].x << ','
                      << lattice.velocities[i].y << ',' << io::format_number(state.F[i]) << '\n';
            }
        }
    };
    record();
    for (long n = 1; n <= k.steps; ++n) {
        state = step(state, net, fam, dt, xi);
        if (n % k.trace_every == 0 || n == k.steps) record();
    }

    Sink sink(c.out, out);
    if (c.format == "csv") {
        io::write_csv_line(sink.stream(), {"t", "S", "sum_F", "sum_F_v2", "max_rhs"});
        for (const auto& r : trace) {
            io::write_csv_line(sink.stream(), {io::format_number(r.t), io::format_number(r.S), io::format_number(r.mass),
                                               io::format_number(r.energy), io::format_number(r.max_rhs)});
        }
    } else {
        json j{{"lattice_radius", k.radius}, {"velocities", lattice.size()}, {"collisions", net.quadruples.size()},
               {"dt", dt},           {"steps", k.steps},           {"xi", k.xi},
               {"seed", k.seed},     {"squeeze", io::squeeze_to_json(fam)}};
        j["trace"] = json::array();
        for (const auto& r : trace) {
            j["trace"].push_back(
                {{"t", r.t}, {"S", r.S}, {"sum_F", r.mass}, {"sum_F_v2", r.energy}, {"max_rhs", r.max_rhs}});
        }
        j["final_F"] = state.F;
        write_json(sink.stream(), j);
    }
    return exit_ok;
}

std::ifstream open_input(const std::string& path, const char* flag)
{
    std::ifstream in(path);
    if (!in) throw config_error(std::string(flag) + ": cannot read '" + path + "'");
    return in;
}

int cmd_infer(const Common& c, const InferOptions& o, std::ostream& out, spdlog::logger& log)
{
    if (o.data.empty() && o.density.empty()) throw config_error("infer needs --data and/or --density");
    if (!(o.threshold > 0.0)) throw config_error("--threshold must be > 0");
    json j = json::object();
    std::optional<SqueezeTable> table;
    if (!o.data.empty()) {
        auto in = open_input(o.data, "--data");
        const auto cols = io::read_numeric_csv(in, {"ln_g", "ratio"});
        EquilibriumDataset data;
        for (std::size_t k = 0; k < cols[0].size(); ++k) data.samples.push_back({cols[0][k], cols[1][k]});
        table = reconstruct_squeeze(data);
        if (data.samples.size() >= 3) {
            const auto est = estimate_q(data, o.threshold);
            j["q"] = est.q;
            j["residual"] = est.residual;
            j["intercept"] = est.intercept;
            j["power_law"] = est.power_law;
            if (!est.power_law) log.warn("residual {} exceeds threshold {}: data are not power-law", est.residual, o.threshold);
        } else {
            log.warn("fewer than 3 samples: q is not estimated");
        }
        j["samples"] = data.samples.size();
        if (!o.reconstruct.empty()) {
            std::ofstream f(o.reconstruct);
            if (!f) throw config_error("cannot open '" + o.reconstruct + "' for --reconstruct");
            io::write_csv_line(f, {"ln_g", "ln_h"});
            for (std::size_t k = 0; k < table->ln_g.size(); ++k) {
                io::write_csv_line(f, {io::format_number(table->ln_g[k]), io::format_number(table->ln_h[k])});
            }
        }
    }
    if (!o.density.empty()) {
        auto in = open_input(o.density, "--density");
        const auto cols = io::read_numeric_csv(in, {"beta", "f"});
        DensityTable d{cols[0], cols[1]};
        const std::vector<double> energies = o.energies.empty() ? std::vector<double>{0.0} : o.energies;
        j["superstatistics"] = json::array();
        for (double E : energies) j["superstatistics"].push_back({{"E", E}, {"B", superstatistics_forward(d, E)}});
    }
    Sink sink(c.out, out);
    if (c.format == "csv") {
        if (!table) throw config_error("--format csv needs --data (it prints the reconstruction table)");
        io::write_csv_line(sink.stream(), {"ln_g", "ln_h"});
        for (std::size_t k = 0; k < table->ln_g.size(); ++k) {
            io::write_csv_line(sink.stream(), {io::format_number(table->ln_g[k]), io::format_number(table->ln_h[k])});
        }
    } else {
        write_json(sink.stream(), j);
    }
    return exit_ok;
}

int report_failure(std::ostream& err, const char* kind, const std::string& message, int code)
{
    json j{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    err << j.dump() << '\n';
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    auto logger = make_logger();

    CLI::App app{"sqstat: squeezed statistical mechanics toolkit", "sqstat"};
    app.footer(exit_code_help);
    app.require_subcommand(1);

    Common common;
    KineticsOptions kin;
    InferOptions inf;
    SweepOptions sw;

    auto* compute = app.add_subcommand("compute", "Thermodynamic report for a model in a given environment");
    add_common(compute, common, true);
    auto* fluct = app.add_subcommand("fluct", "Second moments from the Hessian of the characteristic function");
    add_common(fluct, common, true);
    auto* sweep = app.add_subcommand("sweep", "Thermodynamic reports along one intensive variable");
    add_common(sweep, common, true);
    sweep->add_option("--sweep-var", sw.var, "Intensive variable to sweep")->required();
    sweep->add_option("--from", sw.from, "First value")->required();
    sweep->add_option("--to", sw.to, "Last value")->required();
    sweep->add_option("--steps", sw.steps, "Number of points (>= 2)");

    auto* kinetics = app.add_subcommand("kinetics", "Relax a homogeneous velocity distribution on a 2-D lattice");
    add_common(kinetics, common, false);
    kinetics->add_option("--lattice-radius", kin.radius, "Velocity disk radius R");
    kinetics->add_option("--dt", kin.dt, "Time step (default: half the stability bound)");
    kinetics->add_option("--steps", kin.steps, "Number of RK4 steps");
    kinetics->add_option("--xi", kin.xi, "Symmetric collision weight")->check(CLI::IsMember({"one", "soft"}));
    kinetics->add_option("--trace-every", kin.trace_every, "Trace interval in steps");
    kinetics->add_option("--seed", kin.seed, "Seed for the random initial populations");
    kinetics->add_option("--snapshot", kin.snapshot, "Write per-velocity populations at trace points to this CSV");

    auto* infer = app.add_subcommand("infer", "Estimate q and reconstruct ln h from thermometer ratios");
    add_common(infer, common, false);
    infer->add_option("--data", inf.data, "CSV with header ln_g,ratio");
    infer->add_option("--threshold", inf.threshold, "Residual above which the data are not a power law");
    infer->add_option("--reconstruct", inf.reconstruct, "Write the reconstructed ln h table to this CSV");
    infer->add_option("--density", inf.density, "CSV with header beta,f for the superstatistics integral");
    infer->add_option("--energy", inf.energies, "Energy at which to evaluate B(E) (repeatable)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return report_failure(err, "config", e.what(), exit_config);
    }

    try {
        if (compute->parsed()) return cmd_compute(common, out, *logger);
        if (fluct->parsed()) return cmd_fluct(common, out, *logger);
        if (sweep->parsed()) return cmd_sweep(common, sw, out, *logger);
        if (kinetics->parsed()) return cmd_kinetics(common, kin, out, *logger);
        if (infer->parsed()) return cmd_infer(common, inf, out, *logger);
        return report_failure(err, "config", "no command given", exit_config);
    } catch (const config_error& e) {
        return report_failure(err, e.kind(), e.what(), exit_config);
    } catch (const argument_error& e) {
        return report_failure(err, "config", e.what(), exit_config);
    } catch (const model_error& e) {
        return report_failure(err, e.kind(), e.what(), exit_model);
    } catch (const domain_error& e) {
        return report_failure(err, e.kind(), e.what(), exit_domain);
    } catch (const std::exception& e) {
        return report_failure(err, "other", e.what(), exit_other);
    }
}

}  // namespace sqstat::cli
