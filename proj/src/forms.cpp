#include "fraclab/forms.hpp"

#include <cmath>

namespace fraclab {

Conductivity::Conductivity(GridFunction gamma, double gamma0, double background)
    : gamma_(std::move(gamma)), gamma0_(gamma0), background_(background) {
    if (!(gamma0 > 0.0))
        throw PreconditionError("conductivity lower bound gamma0 must be positive");
    if (gamma_.values.minCoeff() < gamma0 || background < gamma0)
        throw PreconditionError("conductivity violates its lower bound gamma0");
    sqrt_background_ = std::sqrt(background_);
    sqrt_gamma_ = gamma_.values.array().sqrt();
    deviation_ = GridFunction(gamma_.grid, sqrt_gamma_.array() - 1.0);
    max_gamma_ = std::max(gamma_.values.maxCoeff(), background_);
}

Potential liouville_potential(const Conductivity& c, const KernelTable& kt) {
    if (!c.grid()->same_as(*kt.grid())) throw PreconditionError("grid mismatch");
    GridFunction lm = kt.apply(c.deviation());
    if (kt.mode() == KernelMode::zero_extension) {
        // the deviation equals sqrt(background) - 1 outside the box, not zero
        const double m_ext = c.sqrt_background() - 1.0;
        if (m_ext != 0.0)
            for (long i = 0; i < lm.values.size(); ++i)
                lm.values[i] -= kt.tail(i) * m_ext;
    }
    Eigen::VectorXd q = -lm.values.array() / c.sqrt_gamma().array();
    return Potential{GridFunction(c.grid(), std::move(q)), PotentialProvenance::liouville_sum};
}

Potential liouville_potential(const Conductivity& c, const SpectralEngine& eng, double s) {
    GridFunction lm = eng.frac_laplacian(c.deviation(), s);
    Eigen::VectorXd q = -lm.values.array() / c.sqrt_gamma().array();
    return Potential{GridFunction(c.grid(), std::move(q)), PotentialProvenance::liouville_spectral};
}

GridFunction conductivity_apply(const Conductivity& c, const KernelTable& kt, const GridFunction& u) {
    if (!c.grid()->same_as(*kt.grid())) throw PreconditionError("grid mismatch");
    return kt.apply_weighted(u, c.sqrt_gamma(), c.sqrt_background());
}

GridFunction schrodinger_apply(const Potential& p, const KernelTable& kt, const GridFunction& u) {
    GridFunction v = kt.apply(u);
    v.values += p.q.values.cwiseProduct(u.values);
    return v;
}

double bform_conductivity(const Conductivity& c, const KernelTable& kt, const GridFunction& u,
                          const GridFunction& v) {
    return l2_inner(conductivity_apply(c, kt, u), v);
}

double bform_schrodinger(const Potential& p, const KernelTable& kt, const GridFunction& u,
                         const GridFunction& v) {
    return l2_inner(schrodinger_apply(p, kt, u), v);
}

double liouville_residual(const Conductivity& c, const KernelTable& kt, const GridFunction& u,
                          const GridFunction& v) {
    const Potential q = liouville_potential(c, kt);
    GridFunction su(u.grid, c.sqrt_gamma().cwiseProduct(u.values));
    GridFunction sv(v.grid, c.sqrt_gamma().cwiseProduct(v.values));
    return std::fabs(bform_conductivity(c, kt, u, v) - bform_schrodinger(q, kt, su, sv));
}

} // namespace fraclab
