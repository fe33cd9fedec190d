#include "owco/operators.hpp"

#include "owco/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace owco {

namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets)
{
    SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

std::vector<Eigen::Index> non_null_indices(const BlockSpace& s, const IndexMask* mask = nullptr)
{
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (!s.is_null(i) && (!mask || (*mask)[i])) {
            out.push_back(static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

void check_mask(const IndexMask* mask, const BlockSpace& s)
{
    if (mask && mask->size() != s.dim()) {
        throw InputError("row mask length does not match the codomain");
    }
}

void require_endomorphism(const LinearMap& a, const char* what)
{
    if (!a.is_endomorphism()) {
        throw InputError(std::string(what) + " needs a map from a space to itself");
    }
}

void require_same_shape(const LinearMap& a, const LinearMap& b)
{
    if (!a.domain()->same_as(*b.domain()) || !a.codomain()->same_as(*b.codomain())) {
        throw InputError("maps act between different spaces");
    }
}

// Mass-isometric coordinates D_cod^{1/2} A D_dom^{-1/2} on the non-null part.
Eigen::MatrixXcd isometric_block(const LinearMap& a, const std::vector<Eigen::Index>& rows,
                                 const std::vector<Eigen::Index>& cols)
{
    const auto& dom = *a.domain();
    const auto& cod = *a.codomain();
    std::vector<Eigen::Index> row_pos(cod.dim(), -1);
    std::vector<Eigen::Index> col_pos(dom.dim(), -1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        row_pos[rows[i]] = static_cast<Eigen::Index>(i);
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        col_pos[cols[j]] = static_cast<Eigen::Index>(j);
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                  static_cast<Eigen::Index>(cols.size()));
    const auto& e = a.entries();
    for (Eigen::Index r = 0; r < e.outerSize(); ++r) {
        if (row_pos[r] < 0) {
            continue;
        }
        for (SparseMatrix::InnerIterator it(e, r); it; ++it) {
            const Eigen::Index c = it.col();
            if (col_pos[c] < 0) {
                continue;
            }
            out(row_pos[r], col_pos[c]) =
                std::sqrt(cod.mass(static_cast<std::size_t>(r))) * it.value() /
                std::sqrt(dom.mass(static_cast<std::size_t>(c)));
        }
    }
    return out;
}

double largest_singular_value(const Eigen::MatrixXcd& m)
{
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

} // namespace

LinearMap::LinearMap(SpacePtr domain, SpacePtr codomain, SparseMatrix entries)
    : LinearMap(raw(std::move(domain), std::move(codomain), std::move(entries)))
{
    const auto& dom = *domain_;
    const auto& cod = *codomain_;
    entries_.prune([&](const Eigen::Index& r, const Eigen::Index& c, const Complex& v) {
        return v != Complex{0.0, 0.0} && !cod.is_null(static_cast<std::size_t>(r)) &&
               !dom.is_null(static_cast<std::size_t>(c));
    });
    entries_.makeCompressed();
}

LinearMap LinearMap::raw(SpacePtr domain, SpacePtr codomain, SparseMatrix entries)
{
    if (!domain || !codomain) {
        throw InputError("linear map needs both spaces");
    }
    if (static_cast<std::size_t>(entries.rows()) != codomain->dim() ||
        static_cast<std::size_t>(entries.cols()) != domain->dim()) {
        throw InputError("linear map entries do not fit the declared spaces");
    }
    LinearMap out;
    out.domain_ = std::move(domain);
    out.codomain_ = std::move(codomain);
    out.entries_ = std::move(entries);
    out.entries_.makeCompressed();
    return out;
}

BlockVector LinearMap::apply(const BlockVector& f) const
{
    if (!f.space || !f.space->same_as(*domain_)) {
        throw InputError("vector does not live in the domain of the map");
    }
    return BlockVector(codomain_, entries_ * f.values);
}

LinearMap operator*(const LinearMap& a, const LinearMap& b)
{
    if (!a.domain()->same_as(*b.codomain())) {
        throw InputError("composition of maps with mismatched spaces");
    }
    return LinearMap(b.domain(), a.codomain(), SparseMatrix(a.entries() * b.entries()));
}

LinearMap operator+(const LinearMap& a, const LinearMap& b)
{
    require_same_shape(a, b);
    return LinearMap(a.domain(), a.codomain(), SparseMatrix(a.entries() + b.entries()));
}

LinearMap operator-(const LinearMap& a, const LinearMap& b)
{
    require_same_shape(a, b);
    return LinearMap(a.domain(), a.codomain(), SparseMatrix(a.entries() - b.entries()));
}

LinearMap operator*(Complex c, const LinearMap& a)
{
    return LinearMap(a.domain(), a.codomain(), SparseMatrix(c * a.entries()));
}

LinearMap identity(const SpacePtr& space)
{
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < space->dim(); ++i) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex{1.0, 0.0});
    }
    return LinearMap(space, space, from_triplets(space->dim(), space->dim(), t));
}

LinearMap adjoint(const LinearMap& a)
{
    const auto& dom = *a.domain();
    const auto& cod = *a.codomain();
    std::vector<Triplet> t;
    const auto& e = a.entries();
    for (Eigen::Index r = 0; r < e.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(e, r); it; ++it) {
            if (it.value() == Complex{0.0, 0.0}) {
                continue;
            }
            const auto row = static_cast<std::size_t>(r);
            const auto col = static_cast<std::size_t>(it.col());
            if (cod.is_null(row) || dom.is_null(col)) {
                throw ConsistencyError("map has a nonzero entry at (" + std::to_string(row) + ", " +
                                       std::to_string(col) + ") touching a null atom");
            }
            t.emplace_back(static_cast<int>(col), static_cast<int>(row),
                           std::conj(it.value()) * cod.mass(row) / dom.mass(col));
        }
    }
    return LinearMap(a.codomain(), a.domain(), from_triplets(dom.dim(), cod.dim(), t));
}

double operator_norm(const LinearMap& a, const IndexMask* rows)
{
    check_mask(rows, *a.codomain());
    return largest_singular_value(
        isometric_block(a, non_null_indices(*a.codomain(), rows), non_null_indices(*a.domain())));
}

LinearMap wco_build(const WcoSystem& sys)
{
    const auto& s = *sys.space;
    const std::size_t n = sys.graph.size();
    if (s.blocks() != n) {
        throw InputError("space has " + std::to_string(s.blocks()) + " blocks for " + std::to_string(n) +
                         " vertices");
    }
    for (std::size_t b = 0; b < n; ++b) {
        if (s.vertex(b) != b) {
            throw InputError("space blocks must list the vertices in order");
        }
    }
    if (static_cast<std::size_t>(sys.weights.size()) != s.dim()) {
        throw InputError("weight vector does not match the space");
    }
    std::vector<Triplet> t;
    for (Vertex x = 0; x < n; ++x) {
        const Vertex px = sys.graph.phi(x);
        for (std::size_t a = 0; a < s.atoms_per_block(); ++a) {
            const Complex v = sys.weights[static_cast<Eigen::Index>(s.index(x, a))];
            if (v != Complex{0.0, 0.0}) {
                t.emplace_back(static_cast<int>(s.index(x, a)), static_cast<int>(s.index(px, a)), v);
            }
        }
    }
    return LinearMap(sys.space, sys.space, from_triplets(s.dim(), s.dim(), t));
}

WcoSystem owco_system(const OwcoSpec& spec)
{
    spec.validate();
    WcoSystem sys{spec.graph, make_space(spec), {}};
    const std::size_t m = spec.base.size();
    sys.weights.resize(static_cast<Eigen::Index>(spec.graph.size() * m));
    for (std::size_t x = 0; x < spec.graph.size(); ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            sys.weights[static_cast<Eigen::Index>(x * m + w)] =
                spec.lambda(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w));
        }
    }
    return sys;
}

LinearMap owco_build(const OwcoSpec& spec)
{
    return wco_build(owco_system(spec));
}

LinearMap mult_build(const Eigen::VectorXcd& gamma, const SpacePtr& space)
{
    if (static_cast<std::size_t>(gamma.size()) != space->dim()) {
        throw InputError("multiplier has " + std::to_string(gamma.size()) + " values for a space of dimension " +
                         std::to_string(space->dim()));
    }
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < space->dim(); ++i) {
        if (gamma[static_cast<Eigen::Index>(i)] != Complex{0.0, 0.0}) {
            t.emplace_back(static_cast<int>(i), static_cast<int>(i), gamma[static_cast<Eigen::Index>(i)]);
        }
    }
    return LinearMap(space, space, from_triplets(space->dim(), space->dim(), t));
}

IndexMask interior_rows(const WcoSystem& sys)
{
    const auto& s = *sys.space;
    IndexMask keep(s.dim(), false);
    for (Vertex x = 0; x < sys.graph.size(); ++x) {
        const bool inside = !sys.graph.is_truncated(x) && !sys.graph.is_truncated(sys.graph.phi(x));
        for (std::size_t a = 0; a < s.atoms_per_block(); ++a) {
            keep[s.index(x, a)] = inside;
        }
    }
    return keep;
}

PowerResult power_owco(const OwcoSpec& spec, std::size_t n)
{
    if (n == 0) {
        throw InputError("power_owco needs n >= 1");
    }
    const LinearMap c = owco_build(spec);
    LinearMap acc = c;
    for (std::size_t k = 1; k < n; ++k) {
        acc = acc * c;
    }
    OwcoSpec out = spec;
    out.graph = spec.graph.power(n);
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        for (Eigen::Index w = 0; w < spec.lambda.cols(); ++w) {
            Complex prod{1.0, 0.0};
            Vertex z = x;
            for (std::size_t k = 0; k < n; ++k) {
                prod *= spec.lambda(static_cast<Eigen::Index>(z), w);
                z = spec.graph.phi(z);
            }
            out.lambda(static_cast<Eigen::Index>(x), w) = prod;
        }
    }
    return {acc, out};
}

double quasinormality_defect(const LinearMap& a, const IndexMask* rows)
{
    require_endomorphism(a, "quasinormality defect");
    const LinearMap as = adjoint(a);
    return operator_norm(a * as * a - as * a * a, rows);
}

double normality_defect(const LinearMap& a)
{
    require_endomorphism(a, "normality defect");
    const LinearMap as = adjoint(a);
    return operator_norm(as * a - a * as);
}

PolarCheck polar_quasinormal_check(const LinearMap& a, double tol, const IndexMask* rows)
{
    require_endomorphism(a, "polar check");
    check_mask(rows, *a.codomain());
    const auto idx = non_null_indices(*a.domain());
    const Eigen::MatrixXcd b = isometric_block(a, idx, idx);
    PolarCheck out;
    if (b.size() == 0) {
        out.quasinormal = true;
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(b.adjoint() * b);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of A*A failed (dimension " + std::to_string(b.rows()) + ")");
    }
    Eigen::VectorXd lam = eig.eigenvalues();
    const double lam_max = std::max(lam.maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < 1e-13 * lam_max) {
            lam[i] = 0.0;
        }
    }
    const Eigen::VectorXd sigma = lam.cwiseSqrt();
    out.sigma_max = sigma.size() ? sigma.maxCoeff() : 0.0;
    Eigen::VectorXd sigma_inv = Eigen::VectorXd::Zero(sigma.size());
    Eigen::VectorXd range = Eigen::VectorXd::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > 1e-10 * out.sigma_max && sigma[i] > 0.0) {
            sigma_inv[i] = 1.0 / sigma[i];
            range[i] = 1.0;
            ++out.rank;
        }
    }
    const auto& v = eig.eigenvectors();
    const Eigen::MatrixXcd modulus = v * sigma.cast<Complex>().asDiagonal() * v.adjoint();
    const Eigen::MatrixXcd pinv = v * sigma_inv.cast<Complex>().asDiagonal() * v.adjoint();
    const Eigen::MatrixXcd proj = v * range.cast<Complex>().asDiagonal() * v.adjoint();
    const Eigen::MatrixXcd u = b * pinv;
    Eigen::MatrixXcd comm = (u * modulus - modulus * u) * proj;

    if (rows) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (!(*rows)[static_cast<std::size_t>(idx[i])]) {
                comm.row(static_cast<Eigen::Index>(i)).setZero();
            }
        }
    }
    out.defect = largest_singular_value(comm);
    out.quasinormal = out.defect <= tol;
    return out;
}

std::vector<FiberMap> fiber_decompose(const OwcoSpec& spec)
{
    spec.validate();
    const std::size_t m = spec.base.size();
    std::vector<FiberMap> out;
    for (Vertex x : spec.graph.image_set()) {
        const auto& fib = spec.graph.fiber(x);
        std::vector<double> dom_mass(m);
        for (std::size_t w = 0; w < m; ++w) {
            dom_mass[w] = spec.vertex_mass_of(x) * spec.base.mass(w);
        }
        std::vector<double> cod_mass(fib.size() * m);
        std::vector<Triplet> t;
        for (std::size_t j = 0; j < fib.size(); ++j) {
            for (std::size_t w = 0; w < m; ++w) {
                cod_mass[j * m + w] = spec.vertex_mass_of(fib[j]) * spec.base.mass(w);
                const Complex v = spec.lambda(static_cast<Eigen::Index>(fib[j]), static_cast<Eigen::Index>(w));
                if (v != Complex{0.0, 0.0}) {
                    t.emplace_back(static_cast<int>(j * m + w), static_cast<int>(w), v);
                }
            }
        }
        auto dom = std::make_shared<const BlockSpace>(std::vector<Vertex>{x}, m, std::move(dom_mass));
        auto cod = std::make_shared<const BlockSpace>(fib, m, std::move(cod_mass));
        out.push_back(FiberMap{x, fib, LinearMap(dom, cod, from_triplets(fib.size() * m, m, t))});
    }
    return out;
}

IntertwiningReport intertwining_check(const LinearMap& m, const LinearMap& c, const WcoSystem& sys,
                                      const Eigen::VectorXcd& gamma, const IndexMask* rows)
{
    require_endomorphism(m, "intertwining check");
    require_same_shape(m, c);
    const auto& s = *sys.space;
    if (!s.same_as(*c.domain()) || static_cast<std::size_t>(gamma.size()) != s.dim()) {
        throw InputError("intertwining check: system, maps and multiplier disagree on the space");
    }
    check_mask(rows, s);
    IntertwiningReport out;
    for (Vertex x = 0; x < sys.graph.size(); ++x) {
        const Vertex px = sys.graph.phi(x);
        for (std::size_t a = 0; a < s.atoms_per_block(); ++a) {
            const std::size_t i = s.index(x, a);
            if (s.is_null(i) || (rows && !(*rows)[i])) {
                continue;
            }
            const auto ii = static_cast<Eigen::Index>(i);
            const auto pi = static_cast<Eigen::Index>(s.index(px, a));
            out.hypothesis_residual =
                std::max(out.hypothesis_residual, std::abs(sys.weights[ii]) * std::abs(gamma[ii] - gamma[pi]));
        }
    }
    out.commutator_norm = operator_norm(m * c - c * m, rows);
    return out;
}

} // namespace owco
