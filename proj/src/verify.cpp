#include "fraclab/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "fraclab/experiments.hpp"

namespace fraclab {

namespace {

struct Ctx {
    VerifySummary summary;
    unsigned long seed;

    void check(const std::string& name, double measured, double tolerance) {
        const bool ok = measured <= tolerance;
        summary.checks.push_back({name, measured, tolerance, ok});
        if (!ok) summary.all_pass = false;
    }
    void check_true(const std::string& name, bool ok) {
        summary.checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok});
        if (!ok) summary.all_pass = false;
    }
};

GridFunction random_function(const GridPtr& grid, std::mt19937_64& rng, double pad_fraction = 0.25) {
    std::normal_distribution<double> dist(0.0, 1.0);
    const double half = grid->length() / 2.0;
    const double cut = half * (1.0 - pad_fraction * 2.0);
    Eigen::VectorXd v(grid->size());
    for (long i = 0; i < grid->size(); ++i) {
        const auto p = grid->coord(i);
        bool in = true;
        for (int d = 0; d < grid->dim(); ++d) in = in && std::fabs(p[d]) < cut;
        v[i] = in ? dist(rng) : 0.0;
    }
    return GridFunction(grid, std::move(v));
}

GridFunction smooth_bump(const GridPtr& grid, double cx, double r, double cy = 0.0) {
    return sample(grid, [&](double x, double y) {
        double v = bump((x - cx) / r);
        if (grid->dim() == 2) v *= bump((y - cy) / r);
        return v;
    });
}

/// bump'(x/r)-type mean-zero profile; used for operator cross-validation.
GridFunction dipole_bump(const GridPtr& grid, double r) {
    return sample(grid, [&](double x, double y) {
        const double t = x / r;
        double v = 0.0;
        if (std::fabs(t) < 1.0) {
            const double w = 1.0 - t * t;
            v = std::exp(1.0 - 1.0 / w) * (-2.0 * t / (w * w));
        }
        if (grid->dim() == 2) v *= bump(y / r);
        return v;
    });
}

Conductivity smooth_conductivity(const GridPtr& grid, double amplitude, double cx, double r) {
    GridFunction g = smooth_bump(grid, cx, r);
    g.values = 1.0 + amplitude * g.values.array();
    return Conductivity(std::move(g), std::min(1.0, 1.0 + amplitude), 1.0);
}

void operator_checks(Ctx& ctx, int dim, int m, double L, double s, const char* tag) {
    auto grid = make_grid(dim, L, m);
    SpectralEngine eng(grid);
    KernelTable kt_pair(grid, s, KernelMode::pair_only);
    KernelTable kt_ze(grid, s, KernelMode::zero_extension);
    std::mt19937_64 rng(ctx.seed);

    // plane wave is an exact spectral eigenfunction
    {
        const double xi = 2.0 * std::numbers::pi * 3.0 / L;
        GridFunction u = sample(grid, [&](double x, double) { return std::cos(xi * x); });
        GridFunction v = eng.frac_laplacian(u, s);
        const double lam = std::pow(xi * xi, s);
        ctx.check(std::string("operators/planewave_eigenfunction") + tag,
                  (v.values - lam * u.values).norm() / u.values.norm(), 1e-10);
    }
    // constants annihilated (pair kernel and spectral)
    {
        GridFunction c = constant_function(grid, 3.7);
        ctx.check(std::string("operators/constants_annihilated_sum") + tag,
                  kt_pair.apply(c).values.cwiseAbs().maxCoeff(), 1e-12);
        ctx.check(std::string("operators/constants_annihilated_spectral") + tag,
                  eng.frac_laplacian(c, s).values.cwiseAbs().maxCoeff(), 1e-12);
    }
    // linearity and self-adjointness on random functions
    {
        GridFunction u = random_function(grid, rng), v = random_function(grid, rng);
        GridFunction lin(grid, kt_pair.apply(GridFunction(grid, 2.0 * u.values + 3.0 * v.values)).values -
                                   2.0 * kt_pair.apply(u).values - 3.0 * kt_pair.apply(v).values);
        ctx.check(std::string("operators/sum_linearity") + tag,
                  lin.values.cwiseAbs().maxCoeff() /
                      (1.0 + kt_pair.apply(u).values.cwiseAbs().maxCoeff()),
                  1e-12);
        const double a = l2_inner(kt_pair.apply(u), v), b = l2_inner(u, kt_pair.apply(v));
        ctx.check(std::string("operators/sum_self_adjoint") + tag,
                  std::fabs(a - b) / (1.0 + std::fabs(a)), 1e-12);
        const double g1 = gagliardo_seminorm_sq(kt_pair, u);
        const double g2 = l2_inner(kt_pair.apply(u), u);
        ctx.check(std::string("operators/gagliardo_identity_pair") + tag,
                  std::fabs(g1 - g2) / (1.0 + g1), 1e-12);
        const double z1 = gagliardo_seminorm_sq(kt_ze, u);
        const double z2 = l2_inner(kt_ze.apply(u), u);
        ctx.check(std::string("operators/gagliardo_identity_zero_ext") + tag,
                  std::fabs(z1 - z2) / (1.0 + z1), 1e-12);
    }
    // cross-validation on a mean-zero compactly supported profile
    {
        GridFunction u = dipole_bump(grid, L / 8.0);
        GridFunction a = eng.frac_laplacian(u, s);
        GridFunction b = kt_ze.apply(u);
        ctx.check(std::string("operators/cross_validation_zero_ext") + tag,
                  (a.values - b.values).norm() / a.values.norm(), 0.05);
        const double gag = gagliardo_seminorm_sq(kt_ze, u);
        const double hom = eng.sobolev_norm(u, s, NormFlavor::homogeneous);
        ctx.check(std::string("operators/gagliardo_vs_spectral") + tag,
                  std::fabs(gag - hom * hom) / (hom * hom), 0.05);
    }
    // norm relations
    {
        GridFunction u = random_function(grid, rng);
        const double hs = eng.sobolev_norm(u, s, NormFlavor::bessel);
        const double ws = eng.sobolev_norm(u, s, NormFlavor::ws);
        const double l2 = l2_norm(u);
        ctx.check_true(std::string("operators/hs_le_2s_ws") + tag,
                       hs * hs <= std::pow(2.0, s) * ws * ws * (1.0 + 1e-12));
        ctx.check_true(std::string("operators/ws_ge_l2") + tag, ws >= l2 * (1.0 - 1e-12));
        ctx.check(std::string("operators/t0_is_l2") + tag,
                  std::fabs(eng.sobolev_norm(u, 0.0, NormFlavor::bessel) - l2) / (1.0 + l2), 1e-12);
    }
}

void forms_checks(Ctx& ctx, int dim, int m, double L, double s, int triples, const char* tag) {
    auto grid = make_grid(dim, L, m);
    KernelTable kt(grid, s, KernelMode::pair_only);
    std::mt19937_64 rng(ctx.seed + 1);
    std::uniform_real_distribution<double> amp(0.2, 0.9);
    double worst = 0.0, worst_sym = 0.0, worst_coerc = 0.0;
    for (int k = 0; k < triples; ++k) {
        Conductivity c = smooth_conductivity(grid, amp(rng), (k % 3 - 1) * L / 8.0, L / 6.0);
        GridFunction u = random_function(grid, rng), v = random_function(grid, rng);
        const double b = bform_conductivity(c, kt, u, v);
        worst = std::max(worst, liouville_residual(c, kt, u, v) / (std::fabs(b) + 1.0));
        worst_sym = std::max(worst_sym, std::fabs(b - bform_conductivity(c, kt, v, u)) /
                                            (std::fabs(b) + 1.0));
        const double e = bform_conductivity(c, kt, u, u);
        const double g = gagliardo_seminorm_sq(kt, u);
        if (e < c.gamma0() * g * (1.0 - 1e-12) || e > c.max_gamma() * g * (1.0 + 1e-12))
            worst_coerc = std::max(worst_coerc, 1.0);
    }
    ctx.check(std::string("forms/liouville_residual") + tag, worst, 1e-10);
    ctx.check(std::string("forms/bform_symmetry") + tag, worst_sym, 1e-12);
    ctx.check(std::string("forms/coercivity_bounds") + tag, worst_coerc, 0.5);
    // constants give zero potential
    {
        Conductivity c(constant_function(grid, 2.5), 2.5, 2.5);
        const Potential q = liouville_potential(c, kt);
        ctx.check(std::string("forms/constant_gamma_zero_q") + tag,
                  q.q.values.cwiseAbs().maxCoeff(), 1e-12);
    }
}

void solver_checks(Ctx& ctx, int dim, int m, double L, double s, int perturbations,
                   const char* tag) {
    auto grid = make_grid(dim, L, m);
    KernelTable kt(grid, s, KernelMode::pair_only);
    std::mt19937_64 rng(ctx.seed + 2);

    Box omega_b = dim == 1 ? Box::interval(-L / 4.0, 0.0)
                           : Box::rect(-L / 4.0, 0.0, -L / 4.0, 0.0);
    RegionMask omega = make_region(grid, omega_b, RegionLabel::Omega);
    Conductivity c = smooth_conductivity(grid, 0.6, -L / 8.0, L / 10.0);

    // constant exterior data -> constant solution, residual zero
    {
        GridFunction full = constant_function(grid, 1.4);
        GridFunction data = full;
        for (long i : omega.nodes()) data.values[i] = 0.0;
        DirichletProblem p = conductivity_problem(c, omega, data);
        SolveOptions opts;
        opts.method = SolveMethod::direct;
        const SolveReport rep = solve(p, kt, opts);
        ctx.check(std::string("solver/constant_data_exact") + tag,
                  (rep.u.values - full.values).cwiseAbs().maxCoeff(), 1e-9);
    }
    // cg vs direct
    {
        GridFunction f = smooth_bump(grid, L / 4.0, L / 10.0, dim == 2 ? L / 4.0 : 0.0);
        for (long i : omega.nodes()) f.values[i] = 0.0;
        InteriorSolver solver_h(c, omega, kt);
        SolveOptions cg_opts;
        cg_opts.method = SolveMethod::cg;
        cg_opts.tol = 1e-12;
        SolveOptions di_opts;
        di_opts.method = SolveMethod::direct;
        const SolveReport a = solver_h.solve(f, cg_opts);
        const SolveReport b = solver_h.solve(f, di_opts);
        ctx.check(std::string("solver/cg_vs_direct") + tag,
                  (a.u.values - b.u.values).cwiseAbs().maxCoeff(), 1e-8);
        // energy optimality against random interior perturbations
        const double e0 = bform_conductivity(c, kt, b.u, b.u);
        std::normal_distribution<double> dist(0.0, 1.0);
        bool optimal = true;
        for (int k = 0; k < perturbations; ++k) {
            GridFunction w = b.u;
            for (long i : omega.nodes()) w.values[i] += 0.1 * dist(rng);
            if (bform_conductivity(c, kt, w, w) < e0 * (1.0 - 1e-12)) optimal = false;
        }
        ctx.check_true(std::string("solver/energy_optimality") + tag, optimal);
        // linearity in the data
        GridFunction g2 = smooth_bump(grid, L / 3.0, L / 12.0, dim == 2 ? L / 4.0 : 0.0);
        for (long i : omega.nodes()) g2.values[i] = 0.0;
        GridFunction combo(grid, 2.0 * f.values + 3.0 * g2.values);
        const SolveReport r1 = solver_h.solve(combo, di_opts);
        const SolveReport r2 = solver_h.solve(g2, di_opts);
        ctx.check(std::string("solver/linearity") + tag,
                  (r1.u.values - 2.0 * b.u.values - 3.0 * r2.u.values).cwiseAbs().maxCoeff() /
                      (1.0 + r1.u.values.cwiseAbs().maxCoeff()),
                  1e-7);
    }
    // Liouville transport: schrodinger solve of sqrt(gamma) f equals sqrt(gamma) u_f
    {
        GridFunction f = smooth_bump(grid, L / 4.0, L / 10.0, dim == 2 ? L / 4.0 : 0.0);
        for (long i : omega.nodes()) f.values[i] = 0.0;
        SolveOptions di;
        di.method = SolveMethod::direct;
        InteriorSolver cs(c, omega, kt);
        const SolveReport uc = cs.solve(f, di);
        const Potential q = liouville_potential(c, kt);
        GridFunction sf(grid, c.sqrt_gamma().cwiseProduct(f.values));
        InteriorSolver qs(q, omega, kt);
        const SolveReport vq = qs.solve(sf, di);
        ctx.check(std::string("solver/liouville_transport") + tag,
                  (vq.u.values - c.sqrt_gamma().cwiseProduct(uc.u.values)).cwiseAbs().maxCoeff(),
                  1e-8);
    }
}

void dn_checks(Ctx& ctx, int dim, int m, double L, double s, const char* tag) {
    auto grid = make_grid(dim, L, m);
    SpectralEngine eng(grid);
    KernelTable kt(grid, s, KernelMode::pair_only);

    Box omega_b = dim == 1 ? Box::interval(-L / 4.0, 0.0)
                           : Box::rect(-L / 4.0, 0.0, -L / 4.0, 0.0);
    RegionMask omega = make_region(grid, omega_b, RegionLabel::Omega);
    const double wlo = L / 8.0, whi = L / 8.0 + 8.5 * grid->spacing();
    Box wb = dim == 1 ? Box::interval(wlo, whi) : Box::rect(wlo, whi, wlo, whi);
    RegionMask window = make_window(grid, wb, omega);

    Conductivity c = smooth_conductivity(grid, 0.5, -L / 8.0, L / 10.0);
    const DnMatrix A = dn_matrix(c, kt, omega, window, window);
    ctx.check(std::string("dnmap/self_adjoint") + tag,
              (A.entries - A.entries.transpose()).cwiseAbs().maxCoeff(), 1e-10);

    GridFunction g2(grid, Eigen::VectorXd(2.0 * c.gamma().values));
    Conductivity c2(std::move(g2), 2.0 * c.gamma0(), 2.0);
    const DnMatrix A2 = dn_matrix(c2, kt, omega, window, window);
    ctx.check(std::string("dnmap/positive_homogeneity") + tag,
              (A2.entries - 2.0 * A.entries).cwiseAbs().maxCoeff() /
                  (1.0 + A.entries.cwiseAbs().maxCoeff()),
              1e-10);
    ctx.check(std::string("dnmap/opnorm_zero_iff_equal") + tag, dn_opnorm_diff(A, A, eng, s), 1e-14);

    // unit conductivity DN equals the q = 0 Schrodinger DN
    Conductivity unit(constant_function(grid, 1.0), 1.0, 1.0);
    Potential q0{constant_function(grid, 0.0), PotentialProvenance::explicit_values};
    const DnMatrix Du = dn_matrix(unit, kt, omega, window, window);
    const DnMatrix Dq = dn_matrix(q0, kt, omega, window, window);
    ctx.check(std::string("dnmap/unit_gamma_equals_q0") + tag,
              (Du.entries - Dq.entries).cwiseAbs().maxCoeff(), 1e-12);
}

void extcond_checks(Ctx& ctx, int m, double L, double s, int mmax, const char* tag) {
    auto grid = make_grid(1, L, m);
    SpectralEngine eng(grid);
    Box omega_b = Box::interval(-3.0 * L / 8.0, -L / 8.0);
    RegionMask omega = make_region(grid, omega_b, RegionLabel::Omega);
    Box wb = Box::interval(0.0, L / 4.0);
    RegionMask window = make_window(grid, wb, omega);

    for (int M = 1; M <= mmax; ++M) {
        const MomentProfile p = moment_profile(M);
        double worst = 0.0;
        for (double d : p.moment_defects()) worst = std::max(worst, d);
        ctx.check("extcond/moment_defects_M" + std::to_string(M) + tag, worst, 1e-8);
    }

    const std::array<double, 2> x0{L / 8.0, 0.0};
    ExteriorSequence seq = build_sequence(grid, window, x0, 3, {2, 4, 8}, eng, s);
    double worst_norm = 0.0;
    for (const auto& mem : seq.members)
        worst_norm = std::max(worst_norm,
                              std::fabs(eng.sobolev_norm(mem, s, NormFlavor::ws) - 1.0));
    ctx.check(std::string("extcond/ws_normalization") + tag, worst_norm, 1e-10);
    bool decreasing = true;
    for (size_t k = 1; k < seq.l2_norms.size(); ++k)
        decreasing = decreasing && seq.l2_norms[k] < seq.l2_norms[k - 1];
    ctx.check_true(std::string("extcond/l2_monotone_decay") + tag, decreasing);

    const auto rows = scaling_report(seq, eng, {-s, 0.0, 1.0 - s});
    for (const auto& row : rows)
        ctx.check("extcond/slope_t=" + std::to_string(row.t) + tag,
                  std::fabs(row.fitted_slope - row.t), 0.2);
}

void experiment_checks(Ctx& ctx, int m, double L, double s, const char* tag) {
    auto grid = make_grid(1, L, m);
    SpectralEngine eng(grid);
    KernelTable kt(grid, s, KernelMode::pair_only);
    Box omega_b = Box::interval(-3.0 * L / 8.0, -L / 8.0);
    RegionMask omega = make_region(grid, omega_b, RegionLabel::Omega);
    Box wb = Box::interval(0.0, L / 4.0);
    RegionMask window = make_window(grid, wb, omega);
    const std::array<double, 2> x0{L / 8.0, 0.0};
    ExteriorSequence seq = build_sequence(grid, window, x0, 1, {2, 4, 8}, eng, s);

    GridFunction g = smooth_bump(grid, L / 8.0, L / 10.0);
    g.values = 1.0 + 0.8 * g.values.array();
    Conductivity c(std::move(g), 1.0, 1.0);

    const ReconstructionReport rec = reconstruct_point(c, kt, omega, window, seq, eng);
    ctx.check(std::string("experiments/dn_energy_pairing") + tag, rec.max_pairing_gap, 1e-8);
    ctx.check(std::string("experiments/reconstruction_error") + tag, rec.relative_error, 0.10);

    const auto dec = energy_decomposition_check(c, kt, omega, seq);
    double worst = 0.0;
    for (const auto& row : dec) worst = std::max(worst, row.additivity_gap);
    ctx.check(std::string("experiments/decomposition_additivity") + tag, worst, 1e-10);
    ctx.check_true(std::string("experiments/decomposition_terms_decay") + tag,
                   dec.back().term_relax <= dec.front().term_relax + 1e-14);

    // equal conductivities: zero discrepancy
    const InvarianceReport same = invariance_probe(c, c, kt, omega, window, window, eng, s);
    ctx.check(std::string("experiments/invariance_equal_zero") + tag, same.opnorm, 1e-9);

    const PoincareReport poi = poincare_check(omega, eng, s, 10, ctx.seed);
    ctx.check_true(std::string("experiments/poincare_finite") + tag,
                   poi.max_ratio > 0.0 && std::isfinite(poi.max_ratio));
}

void refinement_checks(Ctx& ctx, double s) {
    // cross-validation gap decreases under (m, L) -> (2m, 2L)
    double prev = -1.0;
    bool improving = true;
    for (const auto& [m, L] : std::vector<std::pair<int, double>>{{512, 16.0}, {1024, 32.0}}) {
        auto grid = make_grid(1, L, m);
        SpectralEngine eng(grid);
        KernelTable kt(grid, s, KernelMode::zero_extension);
        GridFunction u = dipole_bump(grid, 2.0);
        GridFunction a = eng.frac_laplacian(u, s);
        GridFunction b = kt.apply(u);
        const double gap = (a.values - b.values).norm() / a.values.norm();
        if (prev >= 0.0 && gap >= prev) improving = false;
        prev = gap;
    }
    ctx.check_true("operators/cross_validation_refinement_improves", improving);
}

} // namespace

VerifySummary run_verify(const std::string& level, unsigned long seed) {
    Ctx ctx;
    ctx.seed = seed;

    // 1D fast battery
    operator_checks(ctx, 1, 512, 16.0, 0.25, "");
    forms_checks(ctx, 1, 256, 16.0, 0.25, level == "full" ? 100 : 20, "");
    solver_checks(ctx, 1, 256, 16.0, 0.25, level == "full" ? 100 : 20, "");
    dn_checks(ctx, 1, 256, 16.0, 0.25, "");
    extcond_checks(ctx, 1024, 8.0, 0.25, level == "full" ? 6 : 3, "");
    experiment_checks(ctx, 1024, 8.0, 0.25, "");

    if (level == "full") {
        operator_checks(ctx, 2, 32, 8.0, 0.75, "_2d");
        forms_checks(ctx, 2, 32, 8.0, 0.75, 10, "_2d");
        solver_checks(ctx, 2, 32, 8.0, 0.75, 20, "_2d");
        dn_checks(ctx, 2, 32, 8.0, 0.75, "_2d");
        refinement_checks(ctx, 0.25);
    }
    return ctx.summary;
}

} // namespace fraclab
