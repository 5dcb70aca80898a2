#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// C_{n,s} = 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|), valid for 0 < s < min(1, n/2).
double cns(int dim, double s);

void require_s_range(int dim, double s);

enum class NormFlavor { bessel, homogeneous, ws };

/// Fourier multiplier machinery on one grid: (-Delta)^s, the Bessel
/// potential <D>^t, and the associated Sobolev norms. Multipliers act on the
/// frequency lattice xi_k = 2*pi*k/L; the zero frequency gets multiplier 0
/// for (-Delta)^s with s > 0 and 1 for <D>^t at any real t.
class SpectralEngine {
public:
    explicit SpectralEngine(GridPtr grid);
    ~SpectralEngine();
    SpectralEngine(const SpectralEngine&) = delete;
    SpectralEngine& operator=(const SpectralEngine&) = delete;

    const GridPtr& grid() const { return grid_; }

    /// (-Delta)^s u, multiplier |xi|^{2s}; s = 0 is the identity.
    GridFunction frac_laplacian(const GridFunction& u, double s) const;
    /// (-Delta)^{t/2} u, multiplier |xi|^t (t >= 0).
    GridFunction half_laplacian(const GridFunction& u, double t) const;
    /// <D>^t u, multiplier (1+|xi|^2)^{t/2}, any real t.
    GridFunction bessel(const GridFunction& u, double t) const;

    /// bessel: ||<D>^t u||_L2; homogeneous: ||(-Delta)^{t/2} u||_L2 (t >= 0);
    /// ws: sqrt(||u||_L2^2 + ||(-Delta)^{t/2} u||_L2^2).
    double sobolev_norm(const GridFunction& u, double t, NormFlavor flavor) const;

private:
    GridFunction apply_multiplier(const GridFunction& u, const Eigen::ArrayXd& mult) const;
    void roundtrip_check() const;

    GridPtr grid_;
    Eigen::ArrayXd xi2_; // |xi|^2 per node in FFT layout
    void* plan_fwd_;
    void* plan_bwd_;
    mutable std::vector<std::complex<double>> buf_;
    mutable std::mutex mutex_;
};

enum class KernelStorage { automatic, dense, on_the_fly };

/// Exterior handling of the singular sum. pair_only evaluates the box-restricted
/// double sum exactly as written; zero_extension additionally carries the
/// analytically integrated far-field term t(x) = C_{n,s} * Int_{R^n \ box}
/// |x-y|^{-(n+2s)} dy, which renders the R^n operator for zero-extended
/// compactly supported functions.
enum class KernelMode { pair_only, zero_extension };

/// Pairwise weights C_{n,s} |x_i - x_j|^{-(n+2s)} h^n (plain Euclidean distance
/// within the single box copy) plus the optional zero-extension tail.
class KernelTable {
public:
    KernelTable(GridPtr grid, double s, KernelMode mode = KernelMode::pair_only,
                KernelStorage storage = KernelStorage::automatic);
    /// Test hook: override the kernel constant (mutation tests, factorization checks).
    KernelTable(GridPtr grid, double s, double cns_override, KernelMode mode,
                KernelStorage storage = KernelStorage::automatic);

    const GridPtr& grid() const { return grid_; }
    double s() const { return s_; }
    double cns_value() const { return cns_; }
    KernelMode mode() const { return mode_; }
    bool dense() const { return dense_; }

    double weight(long i, long j) const;
    double tail(long i) const { return mode_ == KernelMode::zero_extension ? tail_[i] : 0.0; }
    double row_sum(long i) const { return row_sums_[i]; }

    /// v(x) = sum_{y != x} w(x,y) (u(x) - u(y))  [+ tail(x) u(x) in zero-extension mode].
    GridFunction apply(const GridFunction& u) const;

    /// v(x) = a(x) [ u(x) sum_y w(x,y) a(y) - sum_y w(x,y) a(y) u(y) ]
    ///        [+ tail(x) a(x) a_bg u(x)]; the conductivity operator with a = sqrt(gamma).
    GridFunction apply_weighted(const GridFunction& u, const Eigen::VectorXd& a,
                                double a_background) const;

    /// (1/2) h^n sum_{x != y} w(x,y) (u(x)-u(y))^2 [+ h^n sum_x tail(x) u(x)^2]:
    /// the squared Gagliardo seminorm, equal to <apply(u), u>_l2 as an exact
    /// rearrangement of the symmetric double sum.
    double gagliardo_sq(const GridFunction& u) const;

    /// sum_{j != i} w(i,j) a(j) per node i.
    Eigen::VectorXd weighted_row_sums(const Eigen::VectorXd& a) const;

private:
    void build();
    double pair_weight(long i, long j) const;

    GridPtr grid_;
    double s_;
    double cns_;
    KernelMode mode_;
    bool dense_;
    Eigen::MatrixXd weights_;   // dense storage (empty when on the fly)
    Eigen::VectorXd row_sums_;
    Eigen::VectorXd tail_;
};

GridFunction frac_laplacian_spectral(const SpectralEngine& eng, const GridFunction& u, double s);
GridFunction frac_laplacian_sum(const KernelTable& kt, const GridFunction& u);
double gagliardo_seminorm_sq(const KernelTable& kt, const GridFunction& u);

} // namespace fraclab
