#pragma once

#include "fraclab/grid.hpp"
#include "fraclab/operators.hpp"

namespace fraclab {

/// Mother bump exp(1 - 1/(1-r^2)) for |r| < 1, 0 otherwise; bump(0) = 1.
double bump(double r);

/// 1D profile psi with vanishing moments Int_{-1}^{1} r^k psi dr = 0 for all
/// k < M, built as the M-th derivative of the mother bump so the moment
/// property follows from integration by parts. The derivative is evaluated in
/// closed form through the recurrence bump^{(k)} = bump * P_k / (1-r^2)^{2k};
/// psi is normalized to unit L^2 on the fine sampling and every moment defect
/// is quadrature-checked against the tolerance.
class MomentProfile {
public:
    static MomentProfile build(int vanishing_moments, int fine_resolution = 16384,
                               double defect_tol = 1e-8);

    int moments() const { return moments_; }
    const std::vector<double>& moment_defects() const { return defects_; }
    /// psi(r); exactly zero for |r| >= 1.
    double evaluate(double r) const;
    const std::vector<double>& fine_positions() const { return fine_r_; }
    const std::vector<double>& fine_values() const { return fine_psi_; }

private:
    MomentProfile() = default;
    int moments_ = 0;
    Eigen::VectorXd poly_;   // P_M coefficients, ascending powers
    double scale_ = 1.0;
    std::vector<double> defects_;
    std::vector<double> fine_r_, fine_psi_;
};

MomentProfile moment_profile(int vanishing_moments);

/// The family phi_N = Psi_{N+N0}(. - x0) / ||.||_{W^s}: tensor products of the
/// scaled moment profile, translated to x0 in W and normalized in the W^s norm.
struct ExteriorSequence {
    std::array<double, 2> x0{0.0, 0.0};  // snapped to the lattice
    double snap_distance = 0.0;
    int moments = 0;
    int n0 = 0;
    double s = 0.0;
    std::vector<int> n_list;
    std::vector<GridFunction> members;
    std::vector<double> l2_norms;

    int scale(size_t k) const { return n_list[k] + n0; }
};

/// Builds the sequence; enforces the support rule supp(phi_N) in
/// x0 + [-1/(N+N0), 1/(N+N0)]^n inside W, the resolution rule
/// 1/(N_max+N0) >= 4h, unit W^s normalization (1e-10) and strictly
/// decreasing L^2 norms (the runtime diagnostic for under-resolved scales).
ExteriorSequence build_sequence(const GridPtr& grid, const RegionMask& window,
                                std::array<double, 2> x0, int moments, std::vector<int> n_list,
                                const SpectralEngine& eng, double s);

struct ScalingRow {
    double t;
    std::vector<double> norms;   // ||phi_N||_{H^{t+s}} per member
    double fitted_slope;
    double ratio_lo, ratio_hi;   // band of norm / (N+N0)^t
    bool pass;                   // |fitted_slope - t| <= 0.2
};

/// Log-log slope of ||phi_N||_{H^{t+s}} against the effective scale N+N0 per t.
std::vector<ScalingRow> scaling_report(const ExteriorSequence& seq, const SpectralEngine& eng,
                                       const std::vector<double>& t_list);

} // namespace fraclab
