#pragma once

#include "fraclab/dnmap.hpp"
#include "fraclab/extcond.hpp"

namespace fraclab {

enum class EstimateRule { calibrated, last, richardson };

struct ReconstructionRow {
    int n_index;        // nominal N
    int scale;          // N + N0
    double e_phi;       // E_gamma(phi_N)
    double e_u;         // E_gamma(u_N)
    double dn_pairing;  // <Lambda phi_N, phi_N> = B_gamma(u_N, phi_N)
    double pairing_gap; // |e_u - dn_pairing|
    double e_ref;       // E_1(u_N^ref), unit-conductivity reference energy
    double calibrated;  // e_u / e_ref
};

struct ReconstructionReport {
    std::array<double, 2> x0{0.0, 0.0};
    double snap_distance = 0.0;
    std::vector<ReconstructionRow> rows;
    EstimateRule rule = EstimateRule::calibrated;
    double estimate = 0.0;
    double truth = 0.0;          // gamma at the snapped x0 node
    double relative_error = 0.0;
    double max_pairing_gap = 0.0;
};

struct ReconstructOptions {
    EstimateRule rule = EstimateRule::calibrated;
    double pairing_tol = 1e-8; // |E(u_N) - <Lambda phi_N, phi_N>| gate, relative
};

/// Records both energy tracks E_gamma(phi_N), E_gamma(u_N) along the sequence,
/// checks the DN pairing identity per scale, and forms the point estimate for
/// gamma(x0) by the declared rule. The default rule divides by the energy of
/// the unit-conductivity reference solve with the same exterior data, which
/// cancels the normalization and discretization residues (exact for constant
/// gamma); "last" is the raw final energy, "richardson" extrapolates the last
/// two raw energies in the squared L^2 norms of phi_N.
ReconstructionReport reconstruct_point(const Conductivity& c, const KernelTable& kt,
                                       const RegionMask& omega, const RegionMask& window,
                                       const ExteriorSequence& seq, const SpectralEngine& eng,
                                       const ReconstructOptions& opts = {});

struct DecompositionRow {
    int n_index;
    double term_relax;    // E_gamma(u_N - phi_N)
    double term_cross;    // 2 <Theta grad_s phi_N, grad_s (u_N - phi_N)>
    double term_phi;      // E_gamma(phi_N)
    double e_u;           // E_gamma(u_N)
    double additivity_gap;
};

/// E(u) = E(u-f) + 2 B(f, u-f) + E(f) per scale; the three terms must sum to
/// E(u_N) to rounding, and the first two vanish along the sequence.
std::vector<DecompositionRow> energy_decomposition_check(const Conductivity& c,
                                                         const KernelTable& kt,
                                                         const RegionMask& omega,
                                                         const ExteriorSequence& seq);

struct EnergyEstimateRow {
    double hs_deficit;   // ||u_f - f||_{H^s}
    double l2_data;      // ||f||_{L^2(W)}
    double ratio;        // 0 when f = 0
};

struct EnergyEstimateReport {
    std::vector<EnergyEstimateRow> rows;
    double max_ratio = 0.0;
};

EnergyEstimateReport energy_estimate_check(const Conductivity& c, const KernelTable& kt,
                                           const RegionMask& omega, const RegionMask& window,
                                           const std::vector<GridFunction>& data_list,
                                           const SpectralEngine& eng, double s);
EnergyEstimateReport energy_estimate_check(const Potential& q, const KernelTable& kt,
                                           const RegionMask& omega, const RegionMask& window,
                                           const std::vector<GridFunction>& data_list,
                                           const SpectralEngine& eng, double s);

struct StabilityReport {
    std::vector<double> point_lhs;     // |gamma1 - gamma2| at sampled x0 nodes
    double max_lhs = 0.0;              // max over all W nodes (grid-exact sup norm)
    double rhs = 0.0;                  // 2^s * dn_opnorm_diff
    double margin = 0.0;               // rhs - max_lhs
};

/// Verifies ||gamma1-gamma2||_{L^inf(W)} <= 2^s ||Lambda_1 - Lambda_2||_{X->X*}
/// with the lhs evaluated exactly on W nodes and the rhs over the full span of
/// W nodal indicators.
StabilityReport stability_check(const Conductivity& c1, const Conductivity& c2,
                                const KernelTable& kt, const RegionMask& omega,
                                const RegionMask& window, const SpectralEngine& eng, double s,
                                const std::vector<std::array<double, 2>>& sample_points = {});

struct InvarianceReport {
    double opnorm = 0.0;
    double frobenius = 0.0;
    double max_abs = 0.0;
};

/// Partial-data discrepancy ||Lambda_1 - Lambda_2|| for excitations in W1
/// observed on W2. A consistency probe: equal conductivities must give zero,
/// interior-only perturbations strictly positive values.
InvarianceReport invariance_probe(const Conductivity& c1, const Conductivity& c2,
                                  const KernelTable& kt, const RegionMask& omega,
                                  const RegionMask& w1, const RegionMask& w2,
                                  const SpectralEngine& eng, double s);

struct PoincareReport {
    std::vector<double> ratios;    // ||u||_L2 / ||(-Delta)^{s/2} u|| per sample
    double max_ratio = 0.0;        // the estimated constant
    double sharp_constant = 0.0;   // generalized-eigenvalue value (0 when skipped)
};

/// Estimates the discrete constant in ||u||_L2 <= C ||(-Delta)^{s/2} u|| over
/// functions supported in Omega, from seeded random smooth samples; the sharp
/// discrete constant from the seminorm Gram eigenproblem is attached when the
/// interior is small enough to factorize.
PoincareReport poincare_check(const RegionMask& omega, const SpectralEngine& eng, double s,
                              int sample_count, unsigned long seed);

} // namespace fraclab
