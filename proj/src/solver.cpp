#include "fraclab/solver.hpp"

#include <cmath>

namespace fraclab {

namespace {

void require_exterior_support(const RegionMask& omega, const GridFunction& f) {
    for (long i : omega.nodes())
        if (f.values[i] != 0.0)
            throw PreconditionError("exterior data must vanish on Omega nodes");
}

struct CgResult {
    Eigen::VectorXd x;
    int iterations;
    bool indefinite;
    bool converged;
};

CgResult conjugate_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol,
                            long max_iter, bool diag_precond) {
    CgResult res{Eigen::VectorXd::Zero(b.size()), 0, false, true};
    const double bnorm = b.norm();
    if (bnorm == 0.0) return res;
    Eigen::VectorXd invd;
    if (diag_precond) invd = A.diagonal().cwiseInverse();
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = diag_precond ? invd.cwiseProduct(r).eval() : r;
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (long k = 0; k < max_iter; ++k) {
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (pAp <= 0.0) {
            res.indefinite = true;
            res.converged = false;
            return res;
        }
        const double alpha = rz / pAp;
        res.x += alpha * p;
        r -= alpha * Ap;
        ++res.iterations;
        if (r.norm() <= tol * bnorm) return res;
        z = diag_precond ? invd.cwiseProduct(r).eval() : r;
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    res.converged = false;
    return res;
}

} // namespace

DirichletProblem conductivity_problem(Conductivity c, RegionMask omega, GridFunction f) {
    require_same_grid(c.gamma(), f);
    require_exterior_support(omega, f);
    return DirichletProblem{EquationKind::conductivity, std::move(c), std::nullopt, std::move(omega),
                            std::move(f)};
}

DirichletProblem schrodinger_problem(Potential q, RegionMask omega, GridFunction f) {
    require_same_grid(q.q, f);
    require_exterior_support(omega, f);
    return DirichletProblem{EquationKind::schrodinger, std::nullopt, std::move(q), std::move(omega),
                            std::move(f)};
}

InteriorSolver::InteriorSolver(const Conductivity& c, const RegionMask& omega, const KernelTable& kt)
    : kind_(EquationKind::conductivity), cond_(c), omega_(omega), kt_(&kt),
      interior_(omega.nodes()) {
    if (!c.grid()->same_as(*kt.grid()) || !omega.grid()->same_as(*kt.grid()))
        throw PreconditionError("grid mismatch");
    factorize();
}

InteriorSolver::InteriorSolver(const Potential& q, const RegionMask& omega, const KernelTable& kt)
    : kind_(EquationKind::schrodinger), pot_(q), omega_(omega), kt_(&kt), interior_(omega.nodes()) {
    if (!q.q.grid->same_as(*kt.grid()) || !omega.grid()->same_as(*kt.grid()))
        throw PreconditionError("grid mismatch");
    factorize();
}

void InteriorSolver::factorize() {
    const long ni = static_cast<long>(interior_.size());
    matrix_.resize(ni, ni);
    const double cell = kt_->grid()->cell_measure();
    if (kind_ == EquationKind::conductivity) {
        const Eigen::VectorXd& a = cond_->sqrt_gamma();
        const Eigen::VectorXd row_a = kt_->weighted_row_sums(a);
        for (long r = 0; r < ni; ++r) {
            const long i = interior_[static_cast<size_t>(r)];
            for (long c = 0; c < ni; ++c) {
                const long j = interior_[static_cast<size_t>(c)];
                matrix_(r, c) = r == c
                    ? cell * (a[i] * row_a[i] + kt_->tail(i) * a[i] * cond_->sqrt_background())
                    : -cell * kt_->weight(i, j) * a[i] * a[j];
            }
        }
    } else {
        for (long r = 0; r < ni; ++r) {
            const long i = interior_[static_cast<size_t>(r)];
            for (long c = 0; c < ni; ++c) {
                const long j = interior_[static_cast<size_t>(c)];
                matrix_(r, c) = r == c
                    ? cell * (kt_->row_sum(i) + kt_->tail(i) + pot_->q.values[i])
                    : -cell * kt_->weight(i, j);
            }
        }
    }
    ldlt_.compute(matrix_);
    if (ldlt_.info() != Eigen::Success)
        throw NumericalError("interior system factorization failed");
}

Eigen::VectorXd InteriorSolver::assemble_rhs(const GridFunction& f) const {
    const GridFunction Af = kind_ == EquationKind::conductivity
        ? conductivity_apply(*cond_, *kt_, f)
        : schrodinger_apply(*pot_, *kt_, f);
    const double cell = kt_->grid()->cell_measure();
    Eigen::VectorXd rhs(static_cast<long>(interior_.size()));
    for (size_t r = 0; r < interior_.size(); ++r)
        rhs[static_cast<long>(r)] = -cell * Af.values[interior_[r]];
    return rhs;
}

SolveReport InteriorSolver::solve(const GridFunction& f, const SolveOptions& opts) const {
    require_same_grid(f, kind_ == EquationKind::conductivity ? cond_->gamma() : pot_->q);
    require_exterior_support(omega_, f);
    const Eigen::VectorXd rhs = assemble_rhs(f);
    const long ni = rhs.size();

    SolveReport report;
    Eigen::VectorXd x;
    if (opts.method == SolveMethod::cg) {
        const long max_iter = static_cast<long>(opts.max_iter_factor) * std::max<long>(ni, 1);
        CgResult cg = conjugate_gradient(matrix_, rhs, opts.tol, max_iter, opts.diagonal_preconditioner);
        if (cg.indefinite) {
            if (!opts.indefinite_fallback)
                throw NumericalError(
                    "cg found an indefinite operator (p.Ap <= 0); use the direct method");
            x = ldlt_.solve(rhs);
            report.method_used = SolveMethod::direct;
        } else if (!cg.converged) {
            throw NumericalError("cg failed to converge within the iteration cap");
        } else {
            x = cg.x;
            report.iterations = cg.iterations;
            report.method_used = SolveMethod::cg;
        }
    } else {
        x = ldlt_.solve(rhs);
        report.method_used = SolveMethod::direct;
    }

    const double rhs_norm = rhs.norm();
    report.relative_residual = rhs_norm == 0.0 ? 0.0 : (matrix_ * x - rhs).norm() / rhs_norm;
    if (report.method_used == SolveMethod::direct && report.relative_residual > 1e-8)
        throw NumericalError("direct solve left a large residual (singular interior system?)");

    GridFunction u = f;
    for (size_t r = 0; r < interior_.size(); ++r)
        u.values[interior_[r]] = x[static_cast<long>(r)];
    u.require_finite("solution");
    report.u = std::move(u);
    return report;
}

InteriorSystem assemble_interior_system(const DirichletProblem& p, const KernelTable& kt) {
    InteriorSystem sys;
    if (p.kind == EquationKind::conductivity) {
        InteriorSolver solver(*p.cond, p.omega, kt);
        sys.matrix = solver.matrix();
        sys.interior_nodes = solver.interior_nodes();
    } else {
        InteriorSolver solver(*p.pot, p.omega, kt);
        sys.matrix = solver.matrix();
        sys.interior_nodes = solver.interior_nodes();
    }
    const GridFunction Af = p.kind == EquationKind::conductivity
        ? conductivity_apply(*p.cond, kt, p.exterior_data)
        : schrodinger_apply(*p.pot, kt, p.exterior_data);
    const double cell = kt.grid()->cell_measure();
    sys.rhs.resize(static_cast<long>(sys.interior_nodes.size()));
    for (size_t r = 0; r < sys.interior_nodes.size(); ++r)
        sys.rhs[static_cast<long>(r)] = -cell * Af.values[sys.interior_nodes[r]];
    return sys;
}

SolveReport solve(const DirichletProblem& p, const KernelTable& kt, const SolveOptions& opts) {
    if (p.kind == EquationKind::conductivity) {
        InteriorSolver solver(*p.cond, p.omega, kt);
        return solver.solve(p.exterior_data, opts);
    }
    InteriorSolver solver(*p.pot, p.omega, kt);
    return solver.solve(p.exterior_data, opts);
}

} // namespace fraclab
