#include "fraclab/extcond.hpp"

#include <cmath>
#include <limits>

namespace fraclab {

double bump(double r) {
    if (std::fabs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

namespace {

using Poly = Eigen::VectorXd; // ascending power coefficients

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out = Poly::Zero(a.size() + b.size() - 1);
    for (long i = 0; i < a.size(); ++i)
        for (long j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly poly_diff(const Poly& a) {
    if (a.size() <= 1) return Poly::Zero(1);
    Poly out(a.size() - 1);
    for (long i = 1; i < a.size(); ++i) out[i - 1] = i * a[i];
    return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly out = Poly::Zero(std::max(a.size(), b.size()));
    out.head(a.size()) += a;
    out.head(b.size()) += b;
    return out;
}

double poly_eval(const Poly& p, double r) {
    double acc = 0.0;
    for (long i = p.size() - 1; i >= 0; --i) acc = acc * r + p[i];
    return acc;
}

/// d/dr [bump * P / w^{2k}] = bump * (P' w^2 - 2r P + 4 k r P w) / w^{2(k+1)},  w = 1 - r^2.
Poly derivative_numerator(int order) {
    Poly w(3); w << 1.0, 0.0, -1.0;
    Poly minus_2r(2); minus_2r << 0.0, -2.0;
    Poly r(2); r << 0.0, 1.0;
    Poly P(1); P << 1.0;
    for (int k = 0; k < order; ++k) {
        Poly t1 = poly_mul(poly_diff(P), poly_mul(w, w));
        Poly t2 = poly_mul(minus_2r, P);
        Poly t3 = 4.0 * k * poly_mul(r, poly_mul(P, w));
        P = poly_add(poly_add(t1, t2), t3);
    }
    return P;
}

} // namespace

MomentProfile MomentProfile::build(int vanishing_moments, int fine_resolution, double defect_tol) {
    if (vanishing_moments < 1 || vanishing_moments > 6)
        throw PreconditionError("vanishing moment count must be in [1, 6]");
    if (fine_resolution < 4096)
        throw PreconditionError("fine sampling resolution must be >= 4096");

    MomentProfile p;
    p.moments_ = vanishing_moments;
    p.poly_ = derivative_numerator(vanishing_moments);
    p.scale_ = 1.0;

    // cell-centered fine sampling of [-1, 1]
    const double hf = 2.0 / fine_resolution;
    p.fine_r_.resize(static_cast<size_t>(fine_resolution));
    p.fine_psi_.resize(static_cast<size_t>(fine_resolution));
    double norm_sq = 0.0;
    for (int j = 0; j < fine_resolution; ++j) {
        const double r = -1.0 + (j + 0.5) * hf;
        const double v = p.evaluate(r);
        p.fine_r_[static_cast<size_t>(j)] = r;
        p.fine_psi_[static_cast<size_t>(j)] = v;
        norm_sq += v * v * hf;
    }
    if (norm_sq <= 0.0) throw NumericalError("moment profile vanished identically");
    p.scale_ = 1.0 / std::sqrt(norm_sq);
    for (auto& v : p.fine_psi_) v *= p.scale_;

    p.defects_.resize(static_cast<size_t>(vanishing_moments));
    for (int k = 0; k < vanishing_moments; ++k) {
        double acc = 0.0;
        for (int j = 0; j < fine_resolution; ++j)
            acc += std::pow(p.fine_r_[static_cast<size_t>(j)], k) * p.fine_psi_[static_cast<size_t>(j)] * hf;
        p.defects_[static_cast<size_t>(k)] = std::fabs(acc);
        if (p.defects_[static_cast<size_t>(k)] > defect_tol)
            throw NumericalError("moment defect exceeds tolerance; raise the sampling resolution");
    }
    return p;
}

double MomentProfile::evaluate(double r) const {
    if (std::fabs(r) >= 1.0) return 0.0;
    const double w = 1.0 - r * r;
    return scale_ * std::exp(1.0 - 1.0 / w) * poly_eval(poly_, r) / std::pow(w, 2.0 * moments_);
}

MomentProfile moment_profile(int vanishing_moments) { return MomentProfile::build(vanishing_moments); }

ExteriorSequence build_sequence(const GridPtr& grid, const RegionMask& window,
                                std::array<double, 2> x0, int moments, std::vector<int> n_list,
                                const SpectralEngine& eng, double s) {
    if (window.label() != RegionLabel::Window)
        throw PreconditionError("build_sequence expects a Window mask");
    if (!window.grid()->same_as(*grid) || !eng.grid()->same_as(*grid))
        throw PreconditionError("grid mismatch");
    if (n_list.empty()) throw PreconditionError("empty scale list");
    for (size_t k = 1; k < n_list.size(); ++k)
        if (n_list[k] <= n_list[k - 1]) throw PreconditionError("scale list must be increasing");
    if (n_list.front() < 1) throw PreconditionError("scales must be positive");
    if (!(s > 0.0 && s < 1.0)) throw PreconditionError("order s must lie in (0, 1)");
    if (!window.bounds().contains(x0, grid->dim()))
        throw PreconditionError("x0 must lie inside the window");

    ExteriorSequence seq;
    seq.moments = moments;
    seq.s = s;
    seq.n_list = n_list;

    // snap x0 to the nearest lattice node
    double snap2 = 0.0;
    for (int d = 0; d < grid->dim(); ++d) {
        const double rel = (x0[d] + grid->length() / 2.0) / grid->spacing();
        int i = static_cast<int>(std::lround(rel));
        i = std::max(0, std::min(grid->nodes_per_axis() - 1, i));
        const double snapped = grid->axis_coord(i);
        snap2 += (snapped - x0[d]) * (snapped - x0[d]);
        seq.x0[d] = snapped;
    }
    seq.snap_distance = std::sqrt(snap2);
    if (!window.bounds().contains(seq.x0, grid->dim()))
        throw PreconditionError("x0 snapped outside the window; move x0 or refine the grid");

    // smallest N0 >= 0 with x0 + [-1/(N_min+N0), 1/(N_min+N0)]^n inside W
    const auto support_box = [&](int nu) {
        Box b;
        for (int d = 0; d < grid->dim(); ++d) {
            b.lo[d] = seq.x0[d] - 1.0 / nu;
            b.hi[d] = seq.x0[d] + 1.0 / nu;
        }
        return b;
    };
    int n0 = 0;
    while (!window.bounds().strictly_contains(support_box(n_list.front() + n0), grid->dim())) {
        ++n0;
        if (n_list.front() + n0 > 1000000)
            throw PreconditionError("x0 too close to the window boundary for the requested scales");
    }
    seq.n0 = n0;

    const int nu_max = n_list.back() + n0;
    if (1.0 / nu_max < 4.0 * grid->spacing())
        throw PreconditionError(
            "resolution violation: largest scale needs 1/(N+N0) >= 4h; refine the grid");

    const MomentProfile profile = MomentProfile::build(moments);
    for (int N : n_list) {
        const int nu = N + n0;
        Eigen::VectorXd v(grid->size());
        if (grid->dim() == 1) {
            for (long i = 0; i < grid->size(); ++i)
                v[i] = profile.evaluate(nu * (grid->coord(i)[0] - seq.x0[0]));
        } else {
            const int m = grid->nodes_per_axis();
            Eigen::VectorXd ax(m), ay(m);
            for (int i = 0; i < m; ++i) {
                ax[i] = profile.evaluate(nu * (grid->axis_coord(i) - seq.x0[0]));
                ay[i] = profile.evaluate(nu * (grid->axis_coord(i) - seq.x0[1]));
            }
            for (long idx = 0; idx < grid->size(); ++idx) {
                const auto ai = grid->axis_index(idx);
                v[idx] = ax[ai[0]] * ay[ai[1]];
            }
        }
        GridFunction member(grid, std::move(v));
        const double wnorm = eng.sobolev_norm(member, s, NormFlavor::ws);
        if (!(wnorm > 0.0))
            throw NumericalError("exterior profile not resolved on the grid (zero W^s norm)");
        member.values /= wnorm;

        const double check = eng.sobolev_norm(member, s, NormFlavor::ws);
        if (std::fabs(check - 1.0) > 1e-10)
            throw NumericalError("W^s normalization drifted beyond 1e-10");

        const Box sup = support_box(nu);
        for (long i = 0; i < grid->size(); ++i) {
            if (member.values[i] == 0.0) continue;
            const auto pnt = grid->coord(i);
            for (int d = 0; d < grid->dim(); ++d)
                if (pnt[d] <= sup.lo[d] || pnt[d] >= sup.hi[d])
                    throw NumericalError("support leaked outside x0 + [-1/(N+N0), 1/(N+N0)]^n");
            if (!window.contains(i))
                throw NumericalError("member support leaked outside the window");
        }

        seq.l2_norms.push_back(l2_norm(member));
        seq.members.push_back(std::move(member));
    }

    for (size_t k = 1; k < seq.l2_norms.size(); ++k)
        if (!(seq.l2_norms[k] < seq.l2_norms[k - 1]))
            throw NumericalError(
                "L^2 norms are not strictly decreasing along the scales; the grid does not "
                "resolve the requested N_list");
    return seq;
}

std::vector<ScalingRow> scaling_report(const ExteriorSequence& seq, const SpectralEngine& eng,
                                       const std::vector<double>& t_list) {
    if (seq.n_list.size() < 3)
        throw PreconditionError("scaling report needs at least 3 scales to regress");
    std::vector<ScalingRow> rows;
    for (double t : t_list) {
        if (t + seq.s < -static_cast<double>(seq.moments))
            throw PreconditionError("order t+s below -M: the moment construction does not reach it");
        ScalingRow row;
        row.t = t;
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        row.ratio_lo = std::numeric_limits<double>::infinity();
        row.ratio_hi = 0.0;
        const long n = static_cast<long>(seq.members.size());
        for (size_t k = 0; k < seq.members.size(); ++k) {
            const double norm = eng.sobolev_norm(seq.members[k], t + seq.s, NormFlavor::bessel);
            row.norms.push_back(norm);
            const double lx = std::log(static_cast<double>(seq.scale(k)));
            const double ly = std::log(norm);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            const double ratio = norm / std::pow(static_cast<double>(seq.scale(k)), t);
            row.ratio_lo = std::min(row.ratio_lo, ratio);
            row.ratio_hi = std::max(row.ratio_hi, ratio);
        }
        row.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        row.pass = std::fabs(row.fitted_slope - t) <= 0.2;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace fraclab
