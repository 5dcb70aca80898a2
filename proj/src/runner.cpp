#include "fraclab/runner.hpp"

#include <cmath>
#include <iostream>
#include <memory>

#include "fraclab/experiments.hpp"
#include "fraclab/report.hpp"
#include "fraclab/verify.hpp"

namespace fraclab {

namespace {

using nlohmann::json;

KernelMode kernel_mode_of(const ExperimentConfig& cfg) {
    return cfg.kernel_mode == "zero_extension" ? KernelMode::zero_extension
                                               : KernelMode::pair_only;
}

json config_echo(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = prov(cfg.experiment, "config");
    j["n"] = prov(static_cast<double>(cfg.n), "config");
    j["L"] = prov(cfg.L, "config");
    j["m"] = prov(static_cast<double>(cfg.m), "config");
    j["s"] = prov(cfg.s, "config");
    j["seed"] = prov(static_cast<double>(cfg.seed), "config");
    j["deterministic"] = prov(cfg.deterministic, "config");
    j["kernel_mode"] = prov(cfg.kernel_mode, "config");
    return j;
}

struct Lab {
    GridPtr grid;
    std::unique_ptr<SpectralEngine> eng;
    std::unique_ptr<KernelTable> kt;
    std::optional<RegionMask> omega;
    std::optional<RegionMask> window;
    std::optional<RegionMask> window2;
};

Lab make_lab(const ExperimentConfig& cfg, bool need_kernel) {
    Lab lab;
    lab.grid = make_grid(cfg.n, cfg.L, cfg.m);
    require_s_range(cfg.n, cfg.s);
    lab.eng = std::make_unique<SpectralEngine>(lab.grid);
    if (need_kernel)
        lab.kt = std::make_unique<KernelTable>(lab.grid, cfg.s, kernel_mode_of(cfg));
    if (cfg.omega)
        lab.omega = make_region(lab.grid, *cfg.omega, RegionLabel::Omega);
    if (cfg.window) {
        if (!lab.omega) throw PreconditionError("a window requires omega");
        lab.window = make_window(lab.grid, *cfg.window, *lab.omega, cfg.window_min_dist);
    }
    if (cfg.window2) {
        if (!lab.omega) throw PreconditionError("a window requires omega");
        lab.window2 = make_window(lab.grid, *cfg.window2, *lab.omega, cfg.window_min_dist);
    }
    return lab;
}

EstimateRule estimate_rule_of(const ExperimentConfig& cfg) {
    if (cfg.estimate_rule == "last") return EstimateRule::last;
    if (cfg.estimate_rule == "richardson") return EstimateRule::richardson;
    return EstimateRule::calibrated;
}

int run_verify_experiment(const ExperimentConfig& cfg) {
    const VerifySummary sum = run_verify(cfg.level, cfg.seed);
    json rep;
    rep["experiment"] = prov(std::string("verify"), "config");
    rep["level"] = prov(cfg.level, "config");
    rep["config"] = config_echo(cfg);
    json checks = json::array();
    std::string first_fail;
    for (const auto& c : sum.checks) {
        json jc;
        jc["name"] = c.name;
        jc["measured"] = prov(c.measured, "computed");
        jc["tolerance"] = prov(c.tolerance, "config");
        jc["pass"] = prov(c.pass, "computed");
        checks.push_back(jc);
        if (!c.pass && first_fail.empty()) first_fail = c.name;
    }
    rep["checks"] = checks;
    rep["all_pass"] = prov(sum.all_pass, "computed");
    if (!sum.all_pass) rep["error"] = json{{"code", 1}, {"reason", "invariant failed: " + first_fail}};
    write_report_json(cfg.outdir, rep);

    CsvWriter csv({"name", "measured", "tolerance", "pass"});
    for (const auto& c : sum.checks)
        csv.add_row_mixed({c.name, format_double(c.measured), format_double(c.tolerance),
                           c.pass ? "1" : "0"});
    csv.write(cfg.outdir);
    for (const auto& c : sum.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  measured=" << c.measured
                  << " tol=" << c.tolerance << "\n";
    return sum.all_pass ? 0 : 1;
}

int run_solve(const ExperimentConfig& cfg) {
    Lab lab = make_lab(cfg, true);
    if (!lab.omega || !lab.window)
        throw PreconditionError("solve requires omega and window");
    Conductivity c = make_conductivity(lab.grid, cfg.conductivity);

    const Box& wb = lab.window->bounds();
    GridFunction f = sample(lab.grid, [&](double x, double y) {
        double v = bump((x - 0.5 * (wb.lo[0] + wb.hi[0])) / (0.45 * (wb.hi[0] - wb.lo[0])));
        if (cfg.n == 2) v *= bump((y - 0.5 * (wb.lo[1] + wb.hi[1])) / (0.45 * (wb.hi[1] - wb.lo[1])));
        return v;
    });
    for (long i = 0; i < lab.grid->size(); ++i)
        if (!lab.window->contains(i)) f.values[i] = 0.0;

    SolveOptions opts;
    opts.method = cfg.method == "direct" ? SolveMethod::direct : SolveMethod::cg;
    opts.tol = cfg.tol;
    DirichletProblem p = conductivity_problem(c, *lab.omega, f);
    const SolveReport rep = solve(p, *lab.kt, opts);

    json j;
    j["experiment"] = prov(std::string("solve"), "config");
    j["config"] = config_echo(cfg);
    j["iterations"] = prov(static_cast<double>(rep.iterations), "computed");
    j["relative_residual"] = prov(rep.relative_residual, "computed");
    j["method_used"] = prov(std::string(rep.method_used == SolveMethod::cg ? "cg" : "direct"),
                            "computed");
    j["energy"] = prov(bform_conductivity(c, *lab.kt, rep.u, rep.u), "computed");
    const bool pass = rep.relative_residual <= cfg.tol * 10.0;
    j["all_pass"] = prov(pass, "computed");
    write_report_json(cfg.outdir, j);

    CsvWriter csv({"node", "x", "y", "u"});
    for (long i = 0; i < lab.grid->size(); ++i) {
        const auto pnt = lab.grid->coord(i);
        csv.add_row({static_cast<double>(i), pnt[0], pnt[1], rep.u.values[i]});
    }
    csv.write(cfg.outdir);
    return pass ? 0 : 1;
}

int run_reconstruct(const ExperimentConfig& cfg) {
    Lab lab = make_lab(cfg, true);
    if (!lab.omega || !lab.window)
        throw PreconditionError("reconstruct requires omega and window");
    Conductivity c = make_conductivity(lab.grid, cfg.conductivity);
    ExteriorSequence seq =
        build_sequence(lab.grid, *lab.window, cfg.x0, cfg.moments, cfg.n_schedule, *lab.eng, cfg.s);

    ReconstructOptions opts;
    opts.rule = estimate_rule_of(cfg);
    const ReconstructionReport rep =
        reconstruct_point(c, *lab.kt, *lab.omega, *lab.window, seq, *lab.eng, opts);

    const double threshold = cfg.conductivity.bumps.empty() ? 1e-6 : 0.10;
    const bool pass = rep.relative_error <= threshold;

    json j;
    j["experiment"] = prov(std::string("reconstruct"), "config");
    j["config"] = config_echo(cfg);
    j["estimate_rule"] = prov(cfg.estimate_rule, "config");
    j["x0"] = json::array({prov(rep.x0[0], "computed"), prov(rep.x0[1], "computed")});
    j["snap_distance"] = prov(rep.snap_distance, "computed");
    j["truth"] = prov(rep.truth, "config");
    j["estimate"] = prov(rep.estimate, "computed");
    j["relative_error"] = prov(rep.relative_error, "computed");
    j["max_pairing_gap"] = prov(rep.max_pairing_gap, "computed");
    j["pass_threshold"] = prov(threshold, "config");
    j["all_pass"] = prov(pass, "computed");
    write_report_json(cfg.outdir, j);

    CsvWriter csv({"N", "E_phi", "E_u", "dn_pairing", "E_ref", "estimate", "abs_err"});
    for (const auto& row : rep.rows) {
        const double est = opts.rule == EstimateRule::last ? row.e_u : row.calibrated;
        csv.add_row({static_cast<double>(row.n_index), row.e_phi, row.e_u, row.dn_pairing,
                     row.e_ref, est, std::fabs(est - rep.truth)});
    }
    csv.write(cfg.outdir);

    if (cfg.plot) {
        std::vector<double> ns, eu, ephi;
        for (const auto& row : rep.rows) {
            ns.push_back(row.scale);
            eu.push_back(row.e_u);
            ephi.push_back(row.e_phi);
        }
        write_text_file(cfg.outdir + "/plot.svg",
                        loglog_svg({ns, ns}, {ephi, eu}, {"E(phi_N)", "E(u_N)"},
                                   "energy concentration"));
    }
    return pass ? 0 : 1;
}

int run_stability(const ExperimentConfig& cfg) {
    Lab lab = make_lab(cfg, true);
    if (!lab.omega || !lab.window)
        throw PreconditionError("stability requires omega and window");
    if (!cfg.conductivity2)
        throw PreconditionError("stability requires conductivity2");
    Conductivity c1 = make_conductivity(lab.grid, cfg.conductivity);
    Conductivity c2 = make_conductivity(lab.grid, *cfg.conductivity2);

    const StabilityReport rep =
        stability_check(c1, c2, *lab.kt, *lab.omega, *lab.window, *lab.eng, cfg.s);
    const bool pass = rep.margin >= -1e-9;

    json j;
    j["experiment"] = prov(std::string("stability"), "config");
    j["config"] = config_echo(cfg);
    j["max_lhs"] = prov(rep.max_lhs, "computed");
    j["rhs"] = prov(rep.rhs, "computed");
    j["margin"] = prov(rep.margin, "computed");
    j["all_pass"] = prov(pass, "computed");
    write_report_json(cfg.outdir, j);

    CsvWriter csv({"x", "y", "gamma1", "gamma2", "absdiff"});
    for (long i : lab.window->nodes()) {
        const auto p = lab.grid->coord(i);
        csv.add_row({p[0], p[1], c1.gamma().values[i], c2.gamma().values[i],
                     std::fabs(c1.gamma().values[i] - c2.gamma().values[i])});
    }
    csv.write(cfg.outdir);
    return pass ? 0 : 1;
}

int run_scaling(const ExperimentConfig& cfg) {
    Lab lab = make_lab(cfg, false);
    if (!lab.omega || !lab.window)
        throw PreconditionError("scaling requires omega and window");
    ExteriorSequence seq =
        build_sequence(lab.grid, *lab.window, cfg.x0, cfg.moments, cfg.n_schedule, *lab.eng, cfg.s);
    std::vector<double> ts = cfg.t_list;
    if (ts.empty()) ts = {-cfg.s, 0.0, 1.0 - cfg.s};
    const auto rows = scaling_report(seq, *lab.eng, ts);

    bool pass = true;
    json j;
    j["experiment"] = prov(std::string("scaling"), "config");
    j["config"] = config_echo(cfg);
    j["n0"] = prov(static_cast<double>(seq.n0), "computed");
    j["snap_distance"] = prov(seq.snap_distance, "computed");
    json jr = json::array();
    CsvWriter csv({"t", "N", "norm", "fitted_slope", "pass"});
    for (const auto& row : rows) {
        pass = pass && row.pass;
        json e;
        e["t"] = prov(row.t, "config");
        e["fitted_slope"] = prov(row.fitted_slope, "computed");
        e["ratio_lo"] = prov(row.ratio_lo, "computed");
        e["ratio_hi"] = prov(row.ratio_hi, "computed");
        e["pass"] = prov(row.pass, "computed");
        jr.push_back(e);
        for (size_t k = 0; k < row.norms.size(); ++k)
            csv.add_row({row.t, static_cast<double>(seq.n_list[k]), row.norms[k],
                         row.fitted_slope, row.pass ? 1.0 : 0.0});
    }
    json jl = json::array();
    for (size_t k = 0; k < seq.l2_norms.size(); ++k)
        jl.push_back(prov(seq.l2_norms[k], "computed"));
    j["l2_norms"] = jl;
    j["rows"] = jr;
    j["all_pass"] = prov(pass, "computed");
    write_report_json(cfg.outdir, j);
    csv.write(cfg.outdir);

    if (cfg.plot) {
        std::vector<std::vector<double>> xs, ys;
        std::vector<std::string> labels;
        for (const auto& row : rows) {
            std::vector<double> ns;
            for (size_t k = 0; k < row.norms.size(); ++k)
                ns.push_back(static_cast<double>(seq.scale(k)));
            xs.push_back(ns);
            ys.push_back(row.norms);
            labels.push_back("t=" + format_double(row.t));
        }
        write_text_file(cfg.outdir + "/plot.svg", loglog_svg(xs, ys, labels, "norm scaling"));
    }
    return pass ? 0 : 1;
}

int run_invariance(const ExperimentConfig& cfg) {
    Lab lab = make_lab(cfg, true);
    if (!lab.omega || !lab.window || !lab.window2)
        throw PreconditionError("invariance requires omega, window and window2");
    Conductivity c1 = make_conductivity(lab.grid, cfg.conductivity);
    const bool same = !cfg.conductivity2.has_value();
    Conductivity c2 = same ? make_conductivity(lab.grid, cfg.conductivity)
                           : make_conductivity(lab.grid, *cfg.conductivity2);

    const InvarianceReport rep =
        invariance_probe(c1, c2, *lab.kt, *lab.omega, *lab.window, *lab.window2, *lab.eng, cfg.s);
    const bool pass = !same || rep.opnorm <= 1e-9;

    json j;
    j["experiment"] = prov(std::string("invariance"), "config");
    j["config"] = config_echo(cfg);
    j["note"] = "consistency probe of the partial-data hypothesis; not a uniqueness proof";
    j["opnorm"] = prov(rep.opnorm, "computed");
    j["frobenius"] = prov(rep.frobenius, "computed");
    j["max_abs"] = prov(rep.max_abs, "computed");
    j["all_pass"] = prov(pass, "computed");
    write_report_json(cfg.outdir, j);

    CsvWriter csv({"quantity", "value"});
    csv.add_row_mixed({"opnorm", format_double(rep.opnorm)});
    csv.add_row_mixed({"frobenius", format_double(rep.frobenius)});
    csv.add_row_mixed({"max_abs", format_double(rep.max_abs)});
    csv.write(cfg.outdir);
    return pass ? 0 : 1;
}

int run_poincare(const ExperimentConfig& cfg) {
    Lab lab = make_lab(cfg, false);
    if (!lab.omega) throw PreconditionError("poincare requires omega");
    const PoincareReport rep = poincare_check(*lab.omega, *lab.eng, cfg.s, cfg.samples, cfg.seed);
    const bool pass = rep.max_ratio > 0.0 && std::isfinite(rep.max_ratio);

    json j;
    j["experiment"] = prov(std::string("poincare"), "config");
    j["config"] = config_echo(cfg);
    j["max_ratio"] = prov(rep.max_ratio, "computed");
    j["sharp_constant"] = prov(rep.sharp_constant, "derived-oracle");
    j["samples"] = prov(static_cast<double>(cfg.samples), "config");
    j["all_pass"] = prov(pass, "computed");
    write_report_json(cfg.outdir, j);

    CsvWriter csv({"sample", "ratio"});
    for (size_t k = 0; k < rep.ratios.size(); ++k)
        csv.add_row({static_cast<double>(k), rep.ratios[k]});
    csv.write(cfg.outdir);
    return pass ? 0 : 1;
}

void write_error_report(const std::string& outdir, int code, const std::string& reason) {
    try {
        json j;
        j["error"] = json{{"code", code}, {"reason", reason}};
        write_report_json(outdir, j);
    } catch (...) {
        // outdir unusable; stderr already carries the reason
    }
}

} // namespace

int run_experiment(const ExperimentConfig& cfg) {
    try {
        if (cfg.experiment == "verify") return run_verify_experiment(cfg);
        if (cfg.experiment == "solve") return run_solve(cfg);
        if (cfg.experiment == "reconstruct") return run_reconstruct(cfg);
        if (cfg.experiment == "stability") return run_stability(cfg);
        if (cfg.experiment == "scaling") return run_scaling(cfg);
        if (cfg.experiment == "invariance") return run_invariance(cfg);
        if (cfg.experiment == "poincare") return run_poincare(cfg);
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        write_error_report(cfg.outdir, 2, e.what());
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violation: " << e.what() << "\n";
        write_error_report(cfg.outdir, 3, e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        write_error_report(cfg.outdir, 4, e.what());
        return 4;
    }
}

int run_config_file(const std::string& path) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config_file(path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return run_experiment(cfg);
}

} // namespace fraclab
