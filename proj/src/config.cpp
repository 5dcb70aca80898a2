#include "fraclab/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

#include "fraclab/extcond.hpp"
#include "fraclab/operators.hpp"

namespace fraclab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

std::array<double, 2> parse_point(const json& j, int dim, const std::string& where) {
    std::array<double, 2> p{0.0, 0.0};
    if (j.is_number()) {
        if (dim != 1) throw ConfigError(where + ": scalar point given for a 2D grid");
        p[0] = j.get<double>();
        return p;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(where + ": expected " + std::to_string(dim) + " coordinates");
    for (int d = 0; d < dim; ++d) p[static_cast<size_t>(d)] = j[static_cast<size_t>(d)].get<double>();
    return p;
}

Box parse_box(const json& j, int dim, const std::string& where) {
    Box b;
    if (dim == 1) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number())
            throw ConfigError(where + ": expected [lo, hi]");
        b = Box::interval(j[0].get<double>(), j[1].get<double>());
    } else {
        if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
            !j[1].is_array() || j[1].size() != 2)
            throw ConfigError(where + ": expected [[xlo, xhi], [ylo, yhi]]");
        b = Box::rect(j[0][0].get<double>(), j[0][1].get<double>(),
                      j[1][0].get<double>(), j[1][1].get<double>());
    }
    return b;
}

ConductivitySpec parse_cond(const json& j, int dim, const std::string& where) {
    reject_unknown(j, {"constant", "bumps"}, where);
    ConductivitySpec spec;
    if (j.contains("constant")) spec.constant = j["constant"].get<double>();
    if (j.contains("bumps")) {
        for (const auto& jb : j["bumps"]) {
            reject_unknown(jb, {"center", "radius", "amplitude"}, where + ".bumps[]");
            BumpSpec b;
            if (jb.contains("center")) b.center = parse_point(jb["center"], dim, where + ".center");
            if (jb.contains("radius")) b.radius = jb["radius"].get<double>();
            if (jb.contains("amplitude")) b.amplitude = jb["amplitude"].get<double>();
            if (!(b.radius > 0.0)) throw ConfigError(where + ": bump radius must be positive");
            spec.bumps.push_back(b);
        }
    }
    return spec;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    static const std::set<std::string> known = {
        "experiment", "n", "L", "m", "s", "omega", "window", "window2", "window_min_dist",
        "conductivity", "conductivity2", "x0", "M", "N_list", "t_list", "estimate_rule",
        "method", "kernel_mode", "tol", "samples", "seed", "deterministic", "outdir", "plot",
        "level"};
    reject_unknown(j, known, "config");

    ExperimentConfig cfg;
    if (!j.contains("experiment")) throw ConfigError("missing 'experiment'");
    cfg.experiment = j["experiment"].get<std::string>();
    static const std::set<std::string> experiments = {
        "verify", "solve", "reconstruct", "stability", "scaling", "invariance", "poincare"};
    if (!experiments.count(cfg.experiment))
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");

    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("L")) cfg.L = j["L"].get<double>();
    if (j.contains("m")) cfg.m = j["m"].get<int>();
    if (j.contains("s")) cfg.s = j["s"].get<double>();
    if (j.contains("omega")) cfg.omega = parse_box(j["omega"], cfg.n, "omega");
    if (j.contains("window")) cfg.window = parse_box(j["window"], cfg.n, "window");
    if (j.contains("window2")) cfg.window2 = parse_box(j["window2"], cfg.n, "window2");
    if (j.contains("window_min_dist")) cfg.window_min_dist = j["window_min_dist"].get<double>();
    if (j.contains("conductivity")) cfg.conductivity = parse_cond(j["conductivity"], cfg.n, "conductivity");
    if (j.contains("conductivity2"))
        cfg.conductivity2 = parse_cond(j["conductivity2"], cfg.n, "conductivity2");
    if (j.contains("x0")) cfg.x0 = parse_point(j["x0"], cfg.n, "x0");
    if (j.contains("M")) cfg.moments = j["M"].get<int>();
    if (j.contains("N_list")) cfg.n_schedule = j["N_list"].get<std::vector<int>>();
    if (j.contains("t_list")) cfg.t_list = j["t_list"].get<std::vector<double>>();
    if (j.contains("estimate_rule")) cfg.estimate_rule = j["estimate_rule"].get<std::string>();
    if (j.contains("method")) cfg.method = j["method"].get<std::string>();
    if (j.contains("kernel_mode")) cfg.kernel_mode = j["kernel_mode"].get<std::string>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("samples")) cfg.samples = j["samples"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned long>();
    if (j.contains("deterministic")) cfg.deterministic = j["deterministic"].get<bool>();
    if (j.contains("outdir")) cfg.outdir = j["outdir"].get<std::string>();
    if (j.contains("plot")) cfg.plot = j["plot"].get<bool>();
    if (j.contains("level")) cfg.level = j["level"].get<std::string>();

    if (cfg.estimate_rule != "calibrated" && cfg.estimate_rule != "last" &&
        cfg.estimate_rule != "richardson")
        throw ConfigError("estimate_rule must be calibrated|last|richardson");
    if (cfg.method != "cg" && cfg.method != "direct")
        throw ConfigError("method must be cg|direct");
    if (cfg.kernel_mode != "pair" && cfg.kernel_mode != "zero_extension")
        throw ConfigError("kernel_mode must be pair|zero_extension");
    if (cfg.level != "fast" && cfg.level != "full")
        throw ConfigError("level must be fast|full");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

GridFunction realize_conductivity(const GridPtr& grid, const ConductivitySpec& spec) {
    return sample(grid, [&](double x, double y) {
        double v = spec.constant;
        for (const auto& b : spec.bumps) {
            double w = bump((x - b.center[0]) / b.radius);
            if (grid->dim() == 2) w *= bump((y - b.center[1]) / b.radius);
            v += b.amplitude * w;
        }
        return v;
    });
}

Conductivity make_conductivity(const GridPtr& grid, const ConductivitySpec& spec) {
    GridFunction g = realize_conductivity(grid, spec);
    const double lo = std::min(g.values.minCoeff(), spec.constant);
    if (!(lo > 0.0))
        throw PreconditionError("conductivity must be positive everywhere");
    return Conductivity(std::move(g), lo, spec.constant);
}

} // namespace fraclab
