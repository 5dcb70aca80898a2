#pragma once

#include <Eigen/Cholesky>

#include <optional>
#include <vector>

#include "fraclab/forms.hpp"

namespace fraclab {

enum class EquationKind { conductivity, schrodinger };

/// Exterior value problem: equation in Omega, u = f in Omega_e. The exterior
/// data must vanish on all Omega nodes (strong imposition on nodes).
struct DirichletProblem {
    EquationKind kind;
    std::optional<Conductivity> cond;
    std::optional<Potential> pot;
    RegionMask omega;
    GridFunction exterior_data;
};

DirichletProblem conductivity_problem(Conductivity c, RegionMask omega, GridFunction f);
DirichletProblem schrodinger_problem(Potential q, RegionMask omega, GridFunction f);

struct InteriorSystem {
    Eigen::MatrixXd matrix;           // B(e_j, e_i) over interior nodal indicators
    Eigen::VectorXd rhs;              // -B(f, e_i)
    std::vector<long> interior_nodes;
};

InteriorSystem assemble_interior_system(const DirichletProblem& p, const KernelTable& kt);

enum class SolveMethod { cg, direct };

struct SolveOptions {
    SolveMethod method = SolveMethod::cg;
    double tol = 1e-10;
    int max_iter_factor = 10;          // max iterations = factor * interior node count
    bool diagonal_preconditioner = false;
    bool indefinite_fallback = false;  // fall back to direct when CG meets p.Ap <= 0
};

struct SolveReport {
    GridFunction u;
    int iterations = 0;
    double relative_residual = 0.0;
    SolveMethod method_used = SolveMethod::direct;
};

/// Assembles and factorizes once; solves for many exterior data vectors.
class InteriorSolver {
public:
    InteriorSolver(const Conductivity& c, const RegionMask& omega, const KernelTable& kt);
    InteriorSolver(const Potential& q, const RegionMask& omega, const KernelTable& kt);

    SolveReport solve(const GridFunction& f, const SolveOptions& opts = {}) const;
    const std::vector<long>& interior_nodes() const { return interior_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

private:
    void factorize();
    Eigen::VectorXd assemble_rhs(const GridFunction& f) const;

    EquationKind kind_;
    std::optional<Conductivity> cond_;
    std::optional<Potential> pot_;
    RegionMask omega_;
    const KernelTable* kt_;
    std::vector<long> interior_;
    Eigen::MatrixXd matrix_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

SolveReport solve(const DirichletProblem& p, const KernelTable& kt, const SolveOptions& opts = {});

} // namespace fraclab
