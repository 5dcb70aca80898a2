#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "fraclab/errors.hpp"

namespace fraclab {

/// Uniform lattice truncation of R^n: nodes at -L/2 + i*h per axis, h = L/m,
/// with m a power of two so the frequency lattice xi_k = 2*pi*k/L,
/// k in [-m/2, m/2), is bijective with the nodes.
class Grid {
public:
    Grid(int dim, double length, int nodes_per_axis);

    int dim() const { return dim_; }
    double length() const { return length_; }
    int nodes_per_axis() const { return m_; }
    double spacing() const { return h_; }
    long size() const { return size_; }
    /// h^n, the quadrature weight of one node.
    double cell_measure() const { return cell_; }

    /// Flat index convention: idx = ix + m*iy.
    long flat_index(int ix, int iy = 0) const { return ix + static_cast<long>(m_) * iy; }
    std::array<int, 2> axis_index(long idx) const {
        return {static_cast<int>(idx % m_), static_cast<int>(idx / m_)};
    }
    std::array<double, 2> coord(long idx) const {
        const auto ai = axis_index(idx);
        return {x0_ + h_ * ai[0], dim_ == 2 ? x0_ + h_ * ai[1] : 0.0};
    }
    double axis_coord(int i) const { return x0_ + h_ * i; }

    /// Signed integer frequency for axis index i: k in [-m/2, m/2).
    int freq_index(int i) const { return i < m_ / 2 ? i : i - m_; }

    bool same_as(const Grid& other) const {
        return dim_ == other.dim_ && m_ == other.m_ && length_ == other.length_;
    }

private:
    int dim_;
    double length_;
    int m_;
    double h_;
    double x0_;
    long size_;
    double cell_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, double length, int nodes_per_axis);

/// Axis-aligned open box; hi/lo entries beyond the grid dimension are ignored.
struct Box {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};

    static Box interval(double a, double b) { return Box{{a, 0.0}, {b, 0.0}}; }
    static Box rect(double ax, double bx, double ay, double by) { return Box{{ax, ay}, {bx, by}}; }

    bool contains(const std::array<double, 2>& p, int dim) const {
        for (int d = 0; d < dim; ++d)
            if (!(p[d] > lo[d] && p[d] < hi[d])) return false;
        return true;
    }
    /// Closed-box inclusion of `inner` in this open box.
    bool strictly_contains(const Box& inner, int dim) const {
        for (int d = 0; d < dim; ++d)
            if (!(inner.lo[d] > lo[d] && inner.hi[d] < hi[d])) return false;
        return true;
    }
};

enum class RegionLabel { Omega, OmegaExt, Window };

/// Node mask for one of the regions Omega / Omega_e / W.
class RegionMask {
public:
    RegionMask(GridPtr grid, RegionLabel label, std::vector<std::uint8_t> inside, Box bounds);

    const GridPtr& grid() const { return grid_; }
    RegionLabel label() const { return label_; }
    bool contains(long idx) const { return inside_[static_cast<size_t>(idx)] != 0; }
    const std::vector<long>& nodes() const { return nodes_; }
    long count() const { return static_cast<long>(nodes_.size()); }
    const Box& bounds() const { return bounds_; }

private:
    GridPtr grid_;
    RegionLabel label_;
    std::vector<std::uint8_t> inside_;
    std::vector<long> nodes_;
    Box bounds_;
};

/// Nodes strictly inside `bounds`. Rejects empty masks.
RegionMask make_region(const GridPtr& grid, const Box& bounds, RegionLabel label);

/// OmegaExt as the exact complement of an Omega mask.
RegionMask complement_of(const RegionMask& omega);

/// Measurement window W inside Omega_e: validates W cap Omega = {} and
/// dist(W, Omega) >= min_dist (> 0; defaults to one node layer h).
RegionMask make_window(const GridPtr& grid, const Box& bounds, const RegionMask& omega,
                       double min_dist = -1.0);

/// Exact min Euclidean node-pair distance between two masks.
double mask_distance(const RegionMask& a, const RegionMask& b);

/// Real-valued samples on a grid. Finite values enforced at construction.
struct GridFunction {
    GridPtr grid;
    Eigen::VectorXd values;

    GridFunction() = default;
    GridFunction(GridPtr g, Eigen::VectorXd v);

    double operator()(long idx) const { return values[idx]; }
    void require_finite(const char* what) const;
};

GridFunction sample(const GridPtr& grid, const std::function<double(double, double)>& f);
GridFunction constant_function(const GridPtr& grid, double c);
GridFunction indicator(const GridPtr& grid, long node);

/// Quadrature inner product h^n * sum(u .* v).
double l2_inner(const GridFunction& u, const GridFunction& v);
double l2_norm(const GridFunction& u);

void require_same_grid(const GridFunction& u, const GridFunction& v);

} // namespace fraclab
