#pragma once

#include "owco/graph.hpp"
#include "owco/spaces.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace owco {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Per-index selector over a block space (true = keep).
using IndexMask = std::vector<bool>;

/// Bounded map between two block spaces, stored as a sparse matrix indexed
/// by (codomain index, domain index).
class LinearMap {
public:
    /// Entries touching null atoms are dropped.
    LinearMap(SpacePtr domain, SpacePtr codomain, SparseMatrix entries);

    /// Keeps entries as given, null atoms included. Used to exercise the adjoint checks.
    static LinearMap raw(SpacePtr domain, SpacePtr codomain, SparseMatrix entries);

    const SpacePtr& domain() const { return domain_; }
    const SpacePtr& codomain() const { return codomain_; }
    const SparseMatrix& entries() const { return entries_; }
    bool is_endomorphism() const { return domain_->same_as(*codomain_); }

    BlockVector apply(const BlockVector& f) const;
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(entries_); }

private:
    LinearMap() = default;

    SpacePtr domain_;
    SpacePtr codomain_;
    SparseMatrix entries_;
};

/// a after b.
LinearMap operator*(const LinearMap& a, const LinearMap& b);
LinearMap operator+(const LinearMap& a, const LinearMap& b);
LinearMap operator-(const LinearMap& a, const LinearMap& b);
LinearMap operator*(Complex c, const LinearMap& a);

LinearMap identity(const SpacePtr& space);

/// Adjoint for the weighted inner products: D_dom^-1 A^H D_cod.
LinearMap adjoint(const LinearMap& a);

/// Largest singular value in mass-isometric coordinates. With a mask only
/// the selected codomain rows count.
double operator_norm(const LinearMap& a, const IndexMask* rows = nullptr);

/// A weighted composition with multiplication weights on a block space whose
/// blocks are the graph's vertices: (Cf)(x, a) = weights(x, a) f(phi(x), a).
struct WcoSystem {
    FunctionalGraph graph;
    SpacePtr space;
    Eigen::VectorXcd weights;
};

LinearMap wco_build(const WcoSystem& sys);

WcoSystem owco_system(const OwcoSpec& spec);
LinearMap owco_build(const OwcoSpec& spec);

LinearMap mult_build(const Eigen::VectorXcd& gamma, const SpacePtr& space);

/// Rows whose vertex x and image phi(x) both have their full fiber.
IndexMask interior_rows(const WcoSystem& sys);

struct PowerResult {
    LinearMap matrix_power;
    OwcoSpec spec; // (phi^n, lambda^[n])
};

PowerResult power_owco(const OwcoSpec& spec, std::size_t n);

/// || A A* A - A* A A ||, optionally restricted to masked rows.
double quasinormality_defect(const LinearMap& a, const IndexMask* rows = nullptr);

/// || A* A - A A* ||.
double normality_defect(const LinearMap& a);

struct PolarCheck {
    bool quasinormal = false;
    double defect = 0.0;
    std::size_t rank = 0;
    double sigma_max = 0.0;
};

/// Builds |A| and the partial isometry U, then measures U|A| - |A|U on range(|A|).
PolarCheck polar_quasinormal_check(const LinearMap& a, double tol, const IndexMask* rows = nullptr);

struct FiberMap {
    Vertex x = 0;
    std::vector<Vertex> fiber;
    LinearMap map; // L^2(mu_x rho) -> sum over y in fiber of L^2(mu_y rho)
};

std::vector<FiberMap> fiber_decompose(const OwcoSpec& spec);

struct IntertwiningReport {
    double hypothesis_residual = 0.0; // max |weight| |gamma(x) - gamma(phi(x))|
    double commutator_norm = 0.0;     // || M C - C M ||
};

IntertwiningReport intertwining_check(const LinearMap& m, const LinearMap& c, const WcoSystem& sys,
                                      const Eigen::VectorXcd& gamma, const IndexMask* rows = nullptr);

} // namespace owco
