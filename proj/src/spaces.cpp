#include "owco/spaces.hpp"

#include "owco/errors.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace owco {

DiscreteMeasureSpace::DiscreteMeasureSpace(std::vector<Atom> atoms) : atoms_(std::move(atoms))
{
    if (atoms_.empty()) {
        throw InputError("measure space needs at least one atom");
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const double m = atoms_[i].mass;
        if (!(m > 0.0) || !std::isfinite(m)) {
            std::ostringstream msg;
            msg << "atom " << i << " (" << atoms_[i].label << ") has mass " << m
                << "; masses must be strictly positive and finite";
            throw InputError(msg.str());
        }
    }
}

double DiscreteMeasureSpace::total_mass() const
{
    double total = 0.0;
    for (const auto& a : atoms_) {
        total += a.mass;
    }
    return total;
}

GridMeasure::GridMeasure(std::vector<double> grid, std::vector<double> weights, Kind kind)
    : grid_(std::move(grid)), weights_(std::move(weights)), kind_(kind)
{
    if (grid_.empty()) {
        throw InputError("grid measure needs at least one grid point");
    }
    if (grid_.size() != weights_.size()) {
        throw InputError("grid measure has " + std::to_string(grid_.size()) + " points but " +
                         std::to_string(weights_.size()) + " weights");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!(grid_[i] >= 0.0) || !std::isfinite(grid_[i])) {
            throw InputError("grid point " + std::to_string(i) + " is not a finite nonnegative real");
        }
        if (i > 0 && !(grid_[i] > grid_[i - 1])) {
            throw InputError("grid is not strictly increasing at index " + std::to_string(i));
        }
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw InputError("grid weight " + std::to_string(i) + " is negative or not finite");
        }
    }
    if (kind_ == Kind::probability) {
        const double total = total_mass();
        if (std::abs(total - 1.0) > probability_tolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "weights sum to " << total << ", not a probability measure";
            throw InputError(msg.str());
        }
    }
}

GridMeasure GridMeasure::dirac(double t)
{
    return GridMeasure({t}, {1.0});
}

double GridMeasure::total_mass() const
{
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double GridMeasure::moment(std::size_t n) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        sum += weights_[i] * std::pow(grid_[i], static_cast<double>(n));
    }
    return sum;
}

BlockSpace::BlockSpace(std::vector<Vertex> vertices, std::size_t atoms_per_block, std::vector<double> masses)
    : vertices_(std::move(vertices)), atoms_(atoms_per_block), masses_(std::move(masses))
{
    if (masses_.size() != vertices_.size() * atoms_) {
        throw InputError("block space mass table has wrong size");
    }
    for (double m : masses_) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw InputError("block space masses must be finite and nonnegative");
        }
    }
    Vertex max_vertex = 0;
    for (Vertex v : vertices_) {
        max_vertex = std::max(max_vertex, v);
    }
    block_lookup_.assign(vertices_.empty() ? 0 : max_vertex + 1, -1);
    for (std::size_t b = 0; b < vertices_.size(); ++b) {
        if (block_lookup_[vertices_[b]] != -1) {
            throw InputError("vertex " + std::to_string(vertices_[b]) + " listed twice in block space");
        }
        block_lookup_[vertices_[b]] = static_cast<std::ptrdiff_t>(b);
    }
}

std::optional<std::size_t> BlockSpace::block_of(Vertex x) const
{
    if (x >= block_lookup_.size() || block_lookup_[x] < 0) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(block_lookup_[x]);
}

std::size_t BlockSpace::null_count() const
{
    std::size_t n = 0;
    for (double m : masses_) {
        n += (m == 0.0);
    }
    return n;
}

bool BlockSpace::same_as(const BlockSpace& other) const
{
    return this == &other ||
           (vertices_ == other.vertices_ && atoms_ == other.atoms_ && masses_ == other.masses_);
}

BlockVector::BlockVector(SpacePtr s) : space(std::move(s)), values(Eigen::VectorXcd::Zero(space->dim())) {}

BlockVector::BlockVector(SpacePtr s, Eigen::VectorXcd v) : space(std::move(s)), values(std::move(v))
{
    if (static_cast<std::size_t>(values.size()) != space->dim()) {
        throw InputError("block vector length does not match its space");
    }
}

double BlockVector::squared_norm() const
{
    return weighted_inner(*this, *this).real();
}

Complex weighted_inner(const BlockVector& f, const BlockVector& g)
{
    if (!f.space || !g.space || !f.space->same_as(*g.space)) {
        throw InputError("inner product of vectors from different block spaces");
    }
    Complex sum{0.0, 0.0};
    const auto& masses = f.space->masses();
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (masses[i] != 0.0) {
            sum += masses[i] * f.values[i] * std::conj(g.values[i]);
        }
    }
    return sum;
}

void OwcoSpec::validate() const
{
    const std::size_t n = graph.size();
    if (static_cast<std::size_t>(lambda.rows()) != n ||
        static_cast<std::size_t>(lambda.cols()) != base.size()) {
        std::ostringstream msg;
        msg << "lambda table is " << lambda.rows() << "x" << lambda.cols() << ", expected " << n << "x"
            << base.size() << " (vertices x atoms)";
        throw InputError(msg.str());
    }
    if (!lambda.allFinite()) {
        throw InputError("lambda table contains non-finite entries");
    }
    if (vertex_mass) {
        if (vertex_mass->size() != n) {
            throw InputError("vertex_mass has " + std::to_string(vertex_mass->size()) + " entries for " +
                             std::to_string(n) + " vertices");
        }
        for (std::size_t x = 0; x < n; ++x) {
            const double m = (*vertex_mass)[x];
            if (!(m > 0.0) || !std::isfinite(m)) {
                throw InputError("vertex mass of " + label(x) + " must be strictly positive and finite");
            }
        }
    }
    if (!vertex_labels.empty() && vertex_labels.size() != n) {
        throw InputError("vertex label list does not match the vertex count");
    }
}

bool OwcoSpec::is_counting() const
{
    if (!vertex_mass) {
        return true;
    }
    for (double m : *vertex_mass) {
        if (m != 1.0) {
            return false;
        }
    }
    return true;
}

double OwcoSpec::vertex_mass_of(Vertex x) const
{
    return vertex_mass ? vertex_mass->at(x) : 1.0;
}

std::string OwcoSpec::label(Vertex x) const
{
    if (x < vertex_labels.size()) {
        return vertex_labels[x];
    }
    return std::to_string(x);
}

SpacePtr make_space(const OwcoSpec& spec)
{
    const std::size_t n = spec.graph.size();
    const std::size_t m = spec.base.size();
    std::vector<Vertex> vertices(n);
    std::iota(vertices.begin(), vertices.end(), Vertex{0});
    std::vector<double> masses(n * m);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            masses[x * m + w] = spec.vertex_mass_of(x) * spec.base.mass(w);
        }
    }
    return std::make_shared<const BlockSpace>(std::move(vertices), m, std::move(masses));
}

OwcoSpec counting_reduction(const OwcoSpec& spec)
{
    spec.validate();
    OwcoSpec out = spec;
    if (!spec.vertex_mass) {
        return out;
    }
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        const double scale = std::sqrt(spec.vertex_mass_of(x) / spec.vertex_mass_of(spec.graph.phi(x)));
        out.lambda.row(static_cast<Eigen::Index>(x)) *= scale;
    }
    out.vertex_mass = std::vector<double>(spec.graph.size(), 1.0);
    return out;
}

double ProductMeasure::total_mass() const
{
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

ProductMeasure product_measure(const DiscreteMeasureSpace& base, const std::vector<GridMeasure>& theta_row)
{
    if (theta_row.size() != base.size()) {
        throw InputError("theta row has " + std::to_string(theta_row.size()) + " measures for " +
                         std::to_string(base.size()) + " atoms");
    }
    const auto& grid = theta_row.front().grid();
    for (std::size_t w = 1; w < theta_row.size(); ++w) {
        if (theta_row[w].grid() != grid) {
            throw InputError("theta measure for atom " + std::to_string(w) + " uses a different grid");
        }
    }
    ProductMeasure out;
    out.n_base = base.size();
    out.n_grid = grid.size();
    out.masses.resize(out.n_base * out.n_grid);
    out.null.resize(out.masses.size());
    for (std::size_t w = 0; w < out.n_base; ++w) {
        for (std::size_t s = 0; s < out.n_grid; ++s) {
            const double m = base.mass(w) * theta_row[w].weight(s);
            out.masses[w * out.n_grid + s] = m;
            out.null[w * out.n_grid + s] = (m == 0.0);
        }
    }
    return out;
}

} // namespace owco
