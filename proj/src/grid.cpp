#include "fraclab/grid.hpp"

#include <cmath>
#include <limits>

namespace fraclab {

namespace {

bool power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

} // namespace

Grid::Grid(int dim, double length, int nodes_per_axis)
    : dim_(dim), length_(length), m_(nodes_per_axis) {
    if (dim != 1 && dim != 2)
        throw PreconditionError("unsupported dimension: n must be 1 or 2");
    if (!(length > 0.0))
        throw PreconditionError("box length must be positive");
    if (!power_of_two(nodes_per_axis) || nodes_per_axis < 16)
        throw PreconditionError("nodes per axis must be a power of two, >= 16");
    h_ = length_ / m_;
    x0_ = -length_ / 2.0;
    size_ = 1;
    for (int d = 0; d < dim_; ++d) size_ *= m_;
    cell_ = std::pow(h_, dim_);
}

GridPtr make_grid(int dim, double length, int nodes_per_axis) {
    return std::make_shared<const Grid>(dim, length, nodes_per_axis);
}

RegionMask::RegionMask(GridPtr grid, RegionLabel label, std::vector<std::uint8_t> inside, Box bounds)
    : grid_(std::move(grid)), label_(label), inside_(std::move(inside)), bounds_(bounds) {
    if (static_cast<long>(inside_.size()) != grid_->size())
        throw PreconditionError("mask size does not match grid");
    for (long i = 0; i < grid_->size(); ++i)
        if (inside_[static_cast<size_t>(i)]) nodes_.push_back(i);
    if (nodes_.empty())
        throw PreconditionError("region mask is empty");
}

RegionMask make_region(const GridPtr& grid, const Box& bounds, RegionLabel label) {
    const double half = grid->length() / 2.0;
    for (int d = 0; d < grid->dim(); ++d)
        if (bounds.lo[d] < -half || bounds.hi[d] > half || bounds.lo[d] >= bounds.hi[d])
            throw PreconditionError("region bounds must be a nonempty box inside [-L/2, L/2)^n");
    std::vector<std::uint8_t> inside(static_cast<size_t>(grid->size()), 0);
    for (long i = 0; i < grid->size(); ++i)
        if (bounds.contains(grid->coord(i), grid->dim())) inside[static_cast<size_t>(i)] = 1;
    return RegionMask(grid, label, std::move(inside), bounds);
}

RegionMask complement_of(const RegionMask& omega) {
    const auto& grid = omega.grid();
    std::vector<std::uint8_t> inside(static_cast<size_t>(grid->size()), 0);
    for (long i = 0; i < grid->size(); ++i)
        if (!omega.contains(i)) inside[static_cast<size_t>(i)] = 1;
    const double half = grid->length() / 2.0;
    Box all = grid->dim() == 1 ? Box::interval(-half, half) : Box::rect(-half, half, -half, half);
    return RegionMask(grid, RegionLabel::OmegaExt, std::move(inside), all);
}

double mask_distance(const RegionMask& a, const RegionMask& b) {
    double best = std::numeric_limits<double>::infinity();
    const auto& grid = a.grid();
    for (long i : a.nodes()) {
        const auto pi = grid->coord(i);
        for (long j : b.nodes()) {
            const auto pj = grid->coord(j);
            double d2 = 0.0;
            for (int d = 0; d < grid->dim(); ++d) {
                const double t = pi[d] - pj[d];
                d2 += t * t;
            }
            if (d2 < best) best = d2;
        }
    }
    return std::sqrt(best);
}

RegionMask make_window(const GridPtr& grid, const Box& bounds, const RegionMask& omega,
                       double min_dist) {
    if (!omega.grid()->same_as(*grid))
        throw PreconditionError("window and omega live on different grids");
    RegionMask w = make_region(grid, bounds, RegionLabel::Window);
    for (long i : w.nodes())
        if (omega.contains(i))
            throw PreconditionError("window overlaps Omega");
    const double r = min_dist > 0.0 ? min_dist : grid->spacing();
    const double d = mask_distance(w, omega);
    if (d < r)
        throw PreconditionError("window touches Omega: dist(W, Omega) below required separation");
    return w;
}

GridFunction::GridFunction(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size())
        throw PreconditionError("grid function sample count does not match grid");
    require_finite("grid function");
}

void GridFunction::require_finite(const char* what) const {
    if (!values.allFinite())
        throw NumericalError(std::string(what) + ": non-finite values");
}

GridFunction sample(const GridPtr& grid, const std::function<double(double, double)>& f) {
    Eigen::VectorXd v(grid->size());
    for (long i = 0; i < grid->size(); ++i) {
        const auto p = grid->coord(i);
        v[i] = f(p[0], p[1]);
    }
    return GridFunction(grid, std::move(v));
}

GridFunction constant_function(const GridPtr& grid, double c) {
    return GridFunction(grid, Eigen::VectorXd::Constant(grid->size(), c));
}

GridFunction indicator(const GridPtr& grid, long node) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->size());
    v[node] = 1.0;
    return GridFunction(grid, std::move(v));
}

void require_same_grid(const GridFunction& u, const GridFunction& v) {
    if (!u.grid || !v.grid || !u.grid->same_as(*v.grid))
        throw PreconditionError("grid mismatch");
}

double l2_inner(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v);
    return u.grid->cell_measure() * u.values.dot(v.values);
}

double l2_norm(const GridFunction& u) {
    return std::sqrt(u.grid->cell_measure()) * u.values.norm();
}

} // namespace fraclab
