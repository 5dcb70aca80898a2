#pragma once

#include "fraclab/solver.hpp"

namespace fraclab {

/// Discrete exterior DN map restricted to measurement windows:
/// entries(i, j) = <Lambda e_j, e_i> = B(u_{e_j}, e_i) over nodal indicators
/// e_j in window_in, e_i in window_out.
struct DnMatrix {
    RegionMask window_in;
    RegionMask window_out;
    Eigen::MatrixXd entries;
    EquationKind kind;
};

/// <Lambda f, g> = B(u_f, g) for exterior data f and test data g, both
/// vanishing on Omega.
double dn_apply(const Conductivity& c, const KernelTable& kt, const RegionMask& omega,
                const GridFunction& f, const GridFunction& g, const SolveOptions& opts = {});
double dn_apply(const Potential& q, const KernelTable& kt, const RegionMask& omega,
                const GridFunction& f, const GridFunction& g, const SolveOptions& opts = {});

/// One direct solve per excitation node (single factorization, many
/// back-substitutions; columns may be computed in parallel, the result does
/// not depend on completion order).
DnMatrix dn_matrix(const Conductivity& c, const KernelTable& kt, const RegionMask& omega,
                   const RegionMask& window_in, const RegionMask& window_out);
DnMatrix dn_matrix(const Potential& q, const KernelTable& kt, const RegionMask& omega,
                   const RegionMask& window_in, const RegionMask& window_out);

/// Gram matrix of nodal indicators in the H^s inner product:
/// G(i, j) = <(D)^s e_i, (D)^s e_j> h^n, computed via the <D>^{2s} multiplier.
Eigen::MatrixXd hs_gram(const SpectralEngine& eng, const RegionMask& window, double s);

/// Largest singular value of G_out^{-1/2} (A - B) G_in^{-1/2}: the X -> X*
/// operator norm of the difference over the span of window indicators.
double dn_opnorm_diff(const DnMatrix& A, const DnMatrix& B, const SpectralEngine& eng, double s);

} // namespace fraclab
