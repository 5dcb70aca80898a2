#pragma once

#include "fraclab/grid.hpp"
#include "fraclab/operators.hpp"

namespace fraclab {

/// Positive conductivity samples with verified lower bound, cached sqrt and
/// background deviation m = sqrt(gamma) - 1. `background` is the constant value
/// gamma takes outside the computational box (relevant only to zero-extension
/// kernels); it is included in the gamma0 check.
class Conductivity {
public:
    Conductivity(GridFunction gamma, double gamma0, double background = 1.0);

    const GridFunction& gamma() const { return gamma_; }
    double gamma0() const { return gamma0_; }
    double background() const { return background_; }
    double sqrt_background() const { return sqrt_background_; }
    const Eigen::VectorXd& sqrt_gamma() const { return sqrt_gamma_; }
    /// m = gamma^{1/2} - 1 on the grid.
    const GridFunction& deviation() const { return deviation_; }
    double max_gamma() const { return max_gamma_; }
    const GridPtr& grid() const { return gamma_.grid; }

private:
    GridFunction gamma_;
    double gamma0_;
    double background_;
    double sqrt_background_;
    Eigen::VectorXd sqrt_gamma_;
    GridFunction deviation_;
    double max_gamma_;
};

enum class PotentialProvenance { liouville_sum, liouville_spectral, explicit_values };

/// Electric potential q on the grid.
struct Potential {
    GridFunction q;
    PotentialProvenance provenance = PotentialProvenance::explicit_values;
};

/// q = -((-Delta)^s m) / gamma^{1/2} with the singular-sum Laplacian of the
/// kernel table; kernel-consistent with bform_conductivity, which makes the
/// discrete Liouville identity exact.
Potential liouville_potential(const Conductivity& c, const KernelTable& kt);
/// Same with the spectral Laplacian (identity then holds only up to discretization).
Potential liouville_potential(const Conductivity& c, const SpectralEngine& eng, double s);

/// A_gamma u with B_gamma(u, v) = <A_gamma u, v>_l2.
GridFunction conductivity_apply(const Conductivity& c, const KernelTable& kt, const GridFunction& u);
/// A_q u with B_q(u, v) = <A_q u, v>_l2: singular-sum gradient part plus q*u.
GridFunction schrodinger_apply(const Potential& p, const KernelTable& kt, const GridFunction& u);

/// (1/2) h^n sum_{x!=y} w(x,y) gamma^{1/2}(x) gamma^{1/2}(y) (u(x)-u(y)) (v(x)-v(y)) [+ tail].
double bform_conductivity(const Conductivity& c, const KernelTable& kt, const GridFunction& u,
                          const GridFunction& v);
/// Gradient part on the same pair kernel plus <q u, v>_l2.
double bform_schrodinger(const Potential& p, const KernelTable& kt, const GridFunction& u,
                         const GridFunction& v);

/// | B_gamma(u,v) - B_{q_gamma}(gamma^{1/2} u, gamma^{1/2} v) | for the
/// kernel-consistent q; floating-point noise by the telescoping identity.
double liouville_residual(const Conductivity& c, const KernelTable& kt, const GridFunction& u,
                          const GridFunction& v);

} // namespace fraclab
