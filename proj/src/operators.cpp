#include "fraclab/operators.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <random>

namespace fraclab {

namespace {

std::mutex g_plan_mutex; // FFTW planning is not thread-safe

/// Gauss-Legendre rule on [0,1] via the Golub-Welsch Jacobi matrix.
struct Quadrature {
    Eigen::VectorXd x, w;
};

Quadrature gauss_legendre_01(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Quadrature q;
    q.x = (es.eigenvalues().array() + 1.0) / 2.0;
    q.w = 2.0 * es.eigenvectors().row(0).array().square() / 2.0;
    return q;
}

} // namespace

void require_s_range(int dim, double s) {
    const double cap = std::min(1.0, dim / 2.0);
    if (!(s > 0.0 && s < cap))
        throw PreconditionError("s must be < min(1, n/2)");
}

double cns(int dim, double s) {
    require_s_range(dim, s);
    const double pi = std::numbers::pi;
    return std::pow(4.0, s) * std::tgamma(dim / 2.0 + s) /
           (std::pow(pi, dim / 2.0) * std::fabs(std::tgamma(-s)));
}

// ---------------------------------------------------------------------------
// SpectralEngine

SpectralEngine::SpectralEngine(GridPtr grid) : grid_(std::move(grid)) {
    const long n = grid_->size();
    buf_.resize(static_cast<size_t>(n));
    const double base = 2.0 * std::numbers::pi / grid_->length();
    xi2_.resize(n);
    for (long i = 0; i < n; ++i) {
        const auto ai = grid_->axis_index(i);
        double x2 = 0.0;
        for (int d = 0; d < grid_->dim(); ++d) {
            const double xi = base * grid_->freq_index(ai[d]);
            x2 += xi * xi;
        }
        xi2_[i] = x2;
    }
    auto* data = reinterpret_cast<fftw_complex*>(buf_.data());
    std::lock_guard lock(g_plan_mutex);
    const int m = grid_->nodes_per_axis();
    if (grid_->dim() == 1) {
        plan_fwd_ = fftw_plan_dft_1d(m, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_1d(m, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
        plan_fwd_ = fftw_plan_dft_2d(m, m, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_2d(m, m, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!plan_fwd_ || !plan_bwd_)
        throw NumericalError("FFT planning failed");
    roundtrip_check();
}

SpectralEngine::~SpectralEngine() {
    std::lock_guard lock(g_plan_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

GridFunction SpectralEngine::apply_multiplier(const GridFunction& u, const Eigen::ArrayXd& mult) const {
    if (!u.grid->same_as(*grid_)) throw PreconditionError("grid mismatch");
    const long n = grid_->size();
    std::lock_guard lock(mutex_);
    for (long i = 0; i < n; ++i) buf_[static_cast<size_t>(i)] = {u.values[i], 0.0};
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    for (long i = 0; i < n; ++i) buf_[static_cast<size_t>(i)] *= mult[i];
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    Eigen::VectorXd out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (long i = 0; i < n; ++i) out[i] = buf_[static_cast<size_t>(i)].real() * scale;
    return GridFunction(grid_, std::move(out));
}

void SpectralEngine::roundtrip_check() const {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(grid_->size());
    for (long i = 0; i < grid_->size(); ++i) v[i] = dist(rng);
    GridFunction probe(grid_, v);
    GridFunction back = apply_multiplier(probe, Eigen::ArrayXd::Ones(grid_->size()));
    const double err = (back.values - v).norm() / v.norm();
    if (err > 1e-12)
        throw NumericalError("FFT round trip exceeded 1e-12 relative error");
}

GridFunction SpectralEngine::frac_laplacian(const GridFunction& u, double s) const {
    if (s < 0.0) throw PreconditionError("fractional Laplacian order must be >= 0");
    if (s == 0.0) return u;
    Eigen::ArrayXd mult(grid_->size());
    for (long i = 0; i < grid_->size(); ++i)
        mult[i] = xi2_[i] == 0.0 ? 0.0 : std::pow(xi2_[i], s);
    return apply_multiplier(u, mult);
}

GridFunction SpectralEngine::half_laplacian(const GridFunction& u, double t) const {
    if (t < 0.0) throw PreconditionError("homogeneous order must be >= 0");
    return frac_laplacian(u, t / 2.0);
}

GridFunction SpectralEngine::bessel(const GridFunction& u, double t) const {
    Eigen::ArrayXd mult = (1.0 + xi2_).pow(t / 2.0);
    return apply_multiplier(u, mult);
}

double SpectralEngine::sobolev_norm(const GridFunction& u, double t, NormFlavor flavor) const {
    switch (flavor) {
    case NormFlavor::bessel:
        return l2_norm(bessel(u, t));
    case NormFlavor::homogeneous:
        return l2_norm(half_laplacian(u, t));
    case NormFlavor::ws: {
        const double a = l2_norm(u);
        const double b = l2_norm(half_laplacian(u, t));
        return std::sqrt(a * a + b * b);
    }
    }
    throw PreconditionError("unknown norm flavor");
}

GridFunction frac_laplacian_spectral(const SpectralEngine& eng, const GridFunction& u, double s) {
    return eng.frac_laplacian(u, s);
}

// ---------------------------------------------------------------------------
// KernelTable

KernelTable::KernelTable(GridPtr grid, double s, KernelMode mode, KernelStorage storage)
    : KernelTable(std::move(grid), s, 0.0, mode, storage) {}

KernelTable::KernelTable(GridPtr grid, double s, double cns_override, KernelMode mode,
                         KernelStorage storage)
    : grid_(std::move(grid)), s_(s), mode_(mode) {
    require_s_range(grid_->dim(), s);
    cns_ = cns_override > 0.0 ? cns_override : cns(grid_->dim(), s);
    switch (storage) {
    case KernelStorage::dense: dense_ = true; break;
    case KernelStorage::on_the_fly: dense_ = false; break;
    case KernelStorage::automatic: dense_ = grid_->size() <= 4096; break;
    }
    build();
}

double KernelTable::pair_weight(long i, long j) const {
    const auto pi = grid_->coord(i);
    const auto pj = grid_->coord(j);
    double d2 = 0.0;
    for (int d = 0; d < grid_->dim(); ++d) {
        const double t = pi[d] - pj[d];
        d2 += t * t;
    }
    const double expo = -(grid_->dim() + 2.0 * s_) / 2.0;
    return cns_ * std::pow(d2, expo) * grid_->cell_measure();
}

void KernelTable::build() {
    const long n = grid_->size();
    row_sums_.setZero(n);
    if (dense_) {
        weights_.setZero(n, n);
        for (long i = 0; i < n; ++i) {
            for (long j = i + 1; j < n; ++j) {
                const double w = pair_weight(i, j);
                weights_(i, j) = w;
                weights_(j, i) = w;
            }
        }
        row_sums_ = weights_.rowwise().sum();
    } else {
        for (long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long j = 0; j < n; ++j)
                if (j != i) acc += pair_weight(i, j);
            row_sums_[i] = acc;
        }
    }

    tail_.setZero(n);
    if (mode_ != KernelMode::zero_extension) return;
    const double half = grid_->length() / 2.0;
    const double hmin = grid_->spacing() / 2.0;
    if (grid_->dim() == 1) {
        for (long i = 0; i < n; ++i) {
            const double x = grid_->coord(i)[0];
            const double dl = std::max(x + half, hmin);
            const double dr = std::max(half - x, hmin);
            tail_[i] = cns_ * (std::pow(dl, -2.0 * s_) + std::pow(dr, -2.0 * s_)) / (2.0 * s_);
        }
    } else {
        // Complement of the box splits into two full vertical half-planes plus
        // two horizontal strips over the box's x-range. Half-planes integrate in
        // closed form; strips need a 2d quadrature (inner integral substituted
        // v = b/t^2-smooth, outer Gauss-Legendre).
        const double Js = std::sqrt(std::numbers::pi) * std::tgamma(s_ + 0.5) / std::tgamma(s_ + 1.0);
        const Quadrature qo = gauss_legendre_01(64);
        const Quadrature qi = gauss_legendre_01(32);
        auto strip = [&](double b, double ulo, double uhi) {
            // Int_{u=ulo}^{uhi} Int_{v>b} (u^2+v^2)^{-(1+s)} dv du
            double acc = 0.0;
            for (int a = 0; a < qo.x.size(); ++a) {
                const double u = ulo + (uhi - ulo) * qo.x[a];
                const double r = u / b;
                double inner = 0.0;
                for (int c = 0; c < qi.x.size(); ++c) {
                    const double tau = qi.x[c];
                    const double t2 = tau * tau;
                    inner += qi.w[c] * 2.0 * tau * std::pow(t2, 2.0 * s_) *
                             std::pow(1.0 + r * r * t2 * t2, -(1.0 + s_));
                }
                acc += qo.w[a] * inner * std::pow(b, -(1.0 + 2.0 * s_));
            }
            return acc * (uhi - ulo);
        };
        for (long i = 0; i < n; ++i) {
            const auto p = grid_->coord(i);
            const double d1l = std::max(p[0] + half, hmin);
            const double d1r = std::max(half - p[0], hmin);
            const double d2b = std::max(p[1] + half, hmin);
            const double d2t = std::max(half - p[1], hmin);
            double tau = Js * (std::pow(d1l, -2.0 * s_) + std::pow(d1r, -2.0 * s_)) / (2.0 * s_);
            tau += strip(d2b, -d1l, d1r);
            tau += strip(d2t, -d1l, d1r);
            tail_[i] = cns_ * tau;
        }
    }
}

double KernelTable::weight(long i, long j) const {
    if (i == j) return 0.0;
    return dense_ ? weights_(i, j) : pair_weight(i, j);
}

GridFunction KernelTable::apply(const GridFunction& u) const {
    if (!u.grid->same_as(*grid_)) throw PreconditionError("grid mismatch");
    const long n = grid_->size();
    Eigen::VectorXd out(n);
    if (dense_) {
        out = u.values.cwiseProduct(row_sums_) - weights_ * u.values;
    } else {
        for (long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long j = 0; j < n; ++j)
                if (j != i) acc += pair_weight(i, j) * u.values[j];
            out[i] = u.values[i] * row_sums_[i] - acc;
        }
    }
    if (mode_ == KernelMode::zero_extension)
        out += tail_.cwiseProduct(u.values);
    GridFunction v(grid_, std::move(out));
    v.require_finite("singular-sum Laplacian");
    return v;
}

GridFunction KernelTable::apply_weighted(const GridFunction& u, const Eigen::VectorXd& a,
                                         double a_background) const {
    if (!u.grid->same_as(*grid_)) throw PreconditionError("grid mismatch");
    const long n = grid_->size();
    Eigen::VectorXd out(n);
    if (dense_) {
        const Eigen::VectorXd wa = weights_ * a;
        const Eigen::VectorXd wau = weights_ * a.cwiseProduct(u.values);
        out = a.cwiseProduct(u.values.cwiseProduct(wa) - wau);
    } else {
        for (long i = 0; i < n; ++i) {
            double acc_a = 0.0, acc_au = 0.0;
            for (long j = 0; j < n; ++j) {
                if (j == i) continue;
                const double w = pair_weight(i, j);
                acc_a += w * a[j];
                acc_au += w * a[j] * u.values[j];
            }
            out[i] = a[i] * (u.values[i] * acc_a - acc_au);
        }
    }
    if (mode_ == KernelMode::zero_extension)
        out += a_background * tail_.cwiseProduct(a.cwiseProduct(u.values));
    GridFunction v(grid_, std::move(out));
    v.require_finite("weighted singular-sum operator");
    return v;
}

double KernelTable::gagliardo_sq(const GridFunction& u) const {
    if (!u.grid->same_as(*grid_)) throw PreconditionError("grid mismatch");
    const long n = grid_->size();
    double acc = 0.0;
    if (dense_) {
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j) {
                const double d = u.values[i] - u.values[j];
                acc += weights_(i, j) * d * d;
            }
    } else {
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j) {
                const double d = u.values[i] - u.values[j];
                acc += pair_weight(i, j) * d * d;
            }
    }
    if (mode_ == KernelMode::zero_extension)
        acc += tail_.dot(u.values.cwiseProduct(u.values));
    return grid_->cell_measure() * acc;
}

Eigen::VectorXd KernelTable::weighted_row_sums(const Eigen::VectorXd& a) const {
    const long n = grid_->size();
    if (a.size() != n) throw PreconditionError("weight vector size mismatch");
    if (dense_) return weights_ * a;
    Eigen::VectorXd out(n);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long j = 0; j < n; ++j)
            if (j != i) acc += pair_weight(i, j) * a[j];
        out[i] = acc;
    }
    return out;
}

GridFunction frac_laplacian_sum(const KernelTable& kt, const GridFunction& u) {
    return kt.apply(u);
}

double gagliardo_seminorm_sq(const KernelTable& kt, const GridFunction& u) {
    return kt.gagliardo_sq(u);
}

} // namespace fraclab
