#pragma once

#include "owco/graph.hpp"

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace owco {

using Complex = std::complex<double>;

inline constexpr double probability_tolerance = 1e-12;

struct Atom {
    std::string label;
    Complex value{0.0, 0.0}; // payload used by gallery formulas, e.g. |w|^2
    double mass = 1.0;
};

/// Atomic measure space (W, rho); every atom carries strictly positive finite mass.
class DiscreteMeasureSpace {
public:
    DiscreteMeasureSpace() = default;
    explicit DiscreteMeasureSpace(std::vector<Atom> atoms);

    std::size_t size() const { return atoms_.size(); }
    const Atom& atom(std::size_t i) const { return atoms_.at(i); }
    double mass(std::size_t i) const { return atoms_.at(i).mass; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double total_mass() const;

private:
    std::vector<Atom> atoms_;
};

/// Finite measure on a strictly increasing grid in [0, inf).
///
/// A probability measure unless constructed with Kind::finite, in which
/// case the total mass is whatever the weights sum to.
class GridMeasure {
public:
    enum class Kind { probability, finite };

    GridMeasure() = default;
    GridMeasure(std::vector<double> grid, std::vector<double> weights, Kind kind = Kind::probability);

    static GridMeasure dirac(double t);

    std::size_t size() const { return grid_.size(); }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    double point(std::size_t i) const { return grid_.at(i); }
    double weight(std::size_t i) const { return weights_.at(i); }
    Kind kind() const { return kind_; }
    bool is_probability() const { return kind_ == Kind::probability; }

    double total_mass() const;
    /// Integral of t^n.
    double moment(std::size_t n) const;

private:
    std::vector<double> grid_;
    std::vector<double> weights_;
    Kind kind_ = Kind::probability;
};

/// Index set of a weighted block space: one block per listed vertex, every
/// block carrying the same number of atoms. mass(b, a) is the measure of
/// atom a in block b (vertex mass already folded in); zero marks a null atom.
class BlockSpace {
public:
    BlockSpace(std::vector<Vertex> vertices, std::size_t atoms_per_block, std::vector<double> masses);

    std::size_t blocks() const { return vertices_.size(); }
    std::size_t atoms_per_block() const { return atoms_; }
    std::size_t dim() const { return masses_.size(); }
    Vertex vertex(std::size_t b) const { return vertices_.at(b); }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    /// Block index of vertex x, or nullopt.
    std::optional<std::size_t> block_of(Vertex x) const;
    std::size_t index(std::size_t block, std::size_t atom) const { return block * atoms_ + atom; }
    double mass(std::size_t i) const { return masses_[i]; }
    double mass(std::size_t block, std::size_t atom) const { return masses_[index(block, atom)]; }
    const std::vector<double>& masses() const { return masses_; }
    bool is_null(std::size_t i) const { return masses_[i] == 0.0; }
    std::size_t null_count() const;

    bool same_as(const BlockSpace& other) const;

private:
    std::vector<Vertex> vertices_;
    std::size_t atoms_;
    std::vector<double> masses_;
    std::vector<std::ptrdiff_t> block_lookup_;
};

using SpacePtr = std::shared_ptr<const BlockSpace>;

/// Element of a block space; entries on null atoms are ignored by every norm.
struct BlockVector {
    SpacePtr space;
    Eigen::VectorXcd values;

    BlockVector() = default;
    explicit BlockVector(SpacePtr s);
    BlockVector(SpacePtr s, Eigen::VectorXcd v);

    Complex at(std::size_t block, std::size_t atom) const { return values[space->index(block, atom)]; }
    Complex& at(std::size_t block, std::size_t atom) { return values[space->index(block, atom)]; }
    double squared_norm() const;
};

/// sum_x mu_x sum_w rho(w) f_x(w) conj(g_x(w)).
Complex weighted_inner(const BlockVector& f, const BlockVector& g);

/// The system (X, phi, W, rho, lambda) with an optional discrete measure on X.
struct OwcoSpec {
    FunctionalGraph graph;
    DiscreteMeasureSpace base;
    Eigen::MatrixXcd lambda; // rows: vertices, columns: atoms of W
    std::optional<std::vector<double>> vertex_mass;
    std::vector<std::string> vertex_labels; // optional, for reports

    void validate() const;
    bool is_counting() const;
    double vertex_mass_of(Vertex x) const;
    std::string label(Vertex x) const;
};

/// Space l^2(H, mu) of an OwcoSpec: block x, atom w has mass mu_x rho(w).
SpacePtr make_space(const OwcoSpec& spec);

/// Unitarily equivalent spec over the counting measure: lambda'_x = sqrt(mu_x / mu_phi(x)) lambda_x.
OwcoSpec counting_reduction(const OwcoSpec& spec);

/// Atomic measure on W x S, atom index w * |S| + s.
struct ProductMeasure {
    std::size_t n_base = 0;
    std::size_t n_grid = 0;
    std::vector<double> masses;
    std::vector<bool> null;

    double mass(std::size_t w, std::size_t s) const { return masses[w * n_grid + s]; }
    bool is_null(std::size_t w, std::size_t s) const { return null[w * n_grid + s]; }
    double total_mass() const;
};

/// mass(w, s) = rho(w) theta^w({s}); every row shares one grid.
ProductMeasure product_measure(const DiscreteMeasureSpace& base, const std::vector<GridMeasure>& theta_row);

} // namespace owco
