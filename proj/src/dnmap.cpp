#include "fraclab/dnmap.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <atomic>
#include <cstdlib>
#include <thread>

namespace fraclab {

namespace {

void require_exterior(const RegionMask& omega, const GridFunction& f, const char* what) {
    for (long i : omega.nodes())
        if (f.values[i] != 0.0)
            throw PreconditionError(std::string(what) + " must vanish on Omega nodes");
}

int thread_count() {
    if (const char* env = std::getenv("FRACLAB_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return 1;
}

template <typename ApplyFn>
DnMatrix dn_matrix_impl(const InteriorSolver& solver, ApplyFn&& apply_op, const KernelTable& kt,
                        const RegionMask& window_in, const RegionMask& window_out,
                        EquationKind kind) {
    if (window_in.label() != RegionLabel::Window || window_out.label() != RegionLabel::Window)
        throw PreconditionError("dn_matrix expects Window masks");
    const auto& grid = kt.grid();
    const auto& in_nodes = window_in.nodes();
    const auto& out_nodes = window_out.nodes();
    Eigen::MatrixXd entries(static_cast<long>(out_nodes.size()), static_cast<long>(in_nodes.size()));
    const double cell = grid->cell_measure();

    auto column = [&](size_t j) {
        GridFunction f = indicator(grid, in_nodes[j]);
        SolveOptions opts;
        opts.method = SolveMethod::direct;
        const SolveReport rep = solver.solve(f, opts);
        const GridFunction Au = apply_op(rep.u);
        for (size_t i = 0; i < out_nodes.size(); ++i)
            entries(static_cast<long>(i), static_cast<long>(j)) = cell * Au.values[out_nodes[i]];
    };

    const int threads = thread_count();
    if (threads <= 1) {
        for (size_t j = 0; j < in_nodes.size(); ++j) column(j);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (size_t j = next.fetch_add(1); j < in_nodes.size(); j = next.fetch_add(1))
                    column(j);
            });
        for (auto& th : pool) th.join();
    }
    return DnMatrix{window_in, window_out, std::move(entries), kind};
}

} // namespace

double dn_apply(const Conductivity& c, const KernelTable& kt, const RegionMask& omega,
                const GridFunction& f, const GridFunction& g, const SolveOptions& opts) {
    require_exterior(omega, f, "excitation data");
    require_exterior(omega, g, "test data");
    InteriorSolver solver(c, omega, kt);
    const SolveReport rep = solver.solve(f, opts);
    return bform_conductivity(c, kt, rep.u, g);
}

double dn_apply(const Potential& q, const KernelTable& kt, const RegionMask& omega,
                const GridFunction& f, const GridFunction& g, const SolveOptions& opts) {
    require_exterior(omega, f, "excitation data");
    require_exterior(omega, g, "test data");
    InteriorSolver solver(q, omega, kt);
    const SolveReport rep = solver.solve(f, opts);
    return bform_schrodinger(q, kt, rep.u, g);
}

DnMatrix dn_matrix(const Conductivity& c, const KernelTable& kt, const RegionMask& omega,
                   const RegionMask& window_in, const RegionMask& window_out) {
    InteriorSolver solver(c, omega, kt);
    return dn_matrix_impl(solver, [&](const GridFunction& u) { return conductivity_apply(c, kt, u); },
                          kt, window_in, window_out, EquationKind::conductivity);
}

DnMatrix dn_matrix(const Potential& q, const KernelTable& kt, const RegionMask& omega,
                   const RegionMask& window_in, const RegionMask& window_out) {
    InteriorSolver solver(q, omega, kt);
    return dn_matrix_impl(solver, [&](const GridFunction& u) { return schrodinger_apply(q, kt, u); },
                          kt, window_in, window_out, EquationKind::schrodinger);
}

Eigen::MatrixXd hs_gram(const SpectralEngine& eng, const RegionMask& window, double s) {
    const auto& nodes = window.nodes();
    const long w = static_cast<long>(nodes.size());
    const double cell = eng.grid()->cell_measure();
    Eigen::MatrixXd G(w, w);
    for (long a = 0; a < w; ++a) {
        const GridFunction e = indicator(eng.grid(), nodes[static_cast<size_t>(a)]);
        const GridFunction v = eng.bessel(e, 2.0 * s);
        for (long b = 0; b < w; ++b)
            G(b, a) = cell * v.values[nodes[static_cast<size_t>(b)]];
    }
    return 0.5 * (G + G.transpose()).eval();
}

double dn_opnorm_diff(const DnMatrix& A, const DnMatrix& B, const SpectralEngine& eng, double s) {
    if (A.window_in.nodes() != B.window_in.nodes() || A.window_out.nodes() != B.window_out.nodes())
        throw PreconditionError("dn_opnorm_diff requires matching windows");
    auto inv_sqrt = [](const Eigen::MatrixXd& G) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
            throw NumericalError("window Gram matrix is not positive definite (degenerate window)");
        return (es.eigenvectors() *
                es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose()).eval();
    };
    const Eigen::MatrixXd Wo = inv_sqrt(hs_gram(eng, A.window_out, s));
    const Eigen::MatrixXd Wi = inv_sqrt(hs_gram(eng, A.window_in, s));
    const Eigen::MatrixXd D = Wo * (A.entries - B.entries) * Wi;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()[0];
}

} // namespace fraclab
