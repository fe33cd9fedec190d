#include "owco/moments.hpp"

#include "owco/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace owco {

namespace {

void validate_sequence(const MomentSequence& a)
{
    for (std::size_t n = 0; n < a.values.size(); ++n) {
        if (!(a.values[n] >= 0.0) || !std::isfinite(a.values[n])) {
            std::ostringstream msg;
            msg << "moment a_" << n << " = " << a.values[n] << " is not a finite nonnegative real";
            throw InputError(msg.str());
        }
    }
}

Eigen::MatrixXd hankel(const std::vector<double>& b, std::size_t order, std::size_t shift)
{
    Eigen::MatrixXd h(order, order);
    for (std::size_t i = 0; i < order; ++i) {
        for (std::size_t j = 0; j < order; ++j) {
            h(i, j) = b[i + j + shift];
        }
    }
    return h;
}

double min_eig(const Eigen::MatrixXd& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

double spectral_norm(const Eigen::MatrixXd& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

bool psd_at(const Eigen::MatrixXd& h, double tol)
{
    return min_eig(h) >= -tol * std::max(1.0, spectral_norm(h));
}

struct Scaled {
    std::vector<double> b;
    double prescale = 1.0;
    double unit = 1.0; // b_n = a_n / (unit * prescale^n)
};

Scaled prescale(const MomentSequence& a, const std::optional<double>& r)
{
    Scaled s;
    s.b = a.values;
    const double a0 = a.values[0];
    if (a0 > 0.0 && r && *r > 0.0) {
        s.prescale = *r;
        s.unit = a0;
    } else {
        const double top = *std::max_element(a.values.begin(), a.values.end());
        s.unit = top > 0.0 ? top : 1.0;
    }
    for (std::size_t n = 0; n < s.b.size(); ++n) {
        s.b[n] = a.values[n] / (s.unit * std::pow(s.prescale, static_cast<double>(n)));
    }
    return s;
}

// Chebyshev algorithm: recurrence coefficients of the orthogonal polynomials
// of the functional with moments b_0..b_{2m-1}.
void chebyshev(const std::vector<double>& b, std::size_t m, Eigen::VectorXd& alpha, Eigen::VectorXd& beta)
{
    const std::size_t len = 2 * m;
    alpha.resize(m);
    beta.resize(m);
    std::vector<double> prev(len, 0.0);
    std::vector<double> cur(b.begin(), b.begin() + len);
    alpha[0] = b[1] / b[0];
    beta[0] = b[0];
    for (std::size_t k = 1; k < m; ++k) {
        std::vector<double> next(len, 0.0);
        for (std::size_t l = k; l < len - k; ++l) {
            next[l] = cur[l + 1] - alpha[k - 1] * cur[l] - beta[k - 1] * prev[l];
        }
        if (!(next[k] > 0.0)) {
            throw NumericalError("recurrence coefficient beta_" + std::to_string(k) +
                                 " is not positive; moment functional degenerates below the detected rank");
        }
        alpha[k] = next[k + 1] / next[k] - cur[k] / cur[k - 1];
        beta[k] = next[k] / cur[k - 1];
        prev = std::move(cur);
        cur = std::move(next);
    }
}

// Newton refinement of (nodes, weights) against b_0..b_{2m-1}; keeps the input if it does not help.
void polish(const std::vector<double>& b, Eigen::VectorXd& t, Eigen::VectorXd& w)
{
    const Eigen::Index m = t.size();
    const Eigen::Index rows = 2 * m;
    auto residual = [&](const Eigen::VectorXd& tt, const Eigen::VectorXd& ww) {
        Eigen::VectorXd r(rows);
        for (Eigen::Index n = 0; n < rows; ++n) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                s += ww[j] * std::pow(tt[j], static_cast<double>(n));
            }
            r[n] = s - b[static_cast<std::size_t>(n)];
        }
        return r;
    };
    Eigen::VectorXd r = residual(t, w);
    for (int iter = 0; iter < 8; ++iter) {
        Eigen::MatrixXd jac(rows, rows);
        for (Eigen::Index n = 0; n < rows; ++n) {
            for (Eigen::Index j = 0; j < m; ++j) {
                jac(n, j) = std::pow(t[j], static_cast<double>(n));
                jac(n, m + j) = n == 0 ? 0.0 : static_cast<double>(n) * w[j] * std::pow(t[j], static_cast<double>(n - 1));
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) {
            return;
        }
        const Eigen::VectorXd step = lu.solve(r);
        Eigen::VectorXd w2 = w - step.head(m);
        Eigen::VectorXd t2 = t - step.tail(m);
        const Eigen::VectorXd r2 = residual(t2, w2);
        if (!(r2.norm() < r.norm())) {
            return;
        }
        t = t2;
        w = w2;
        r = r2;
    }
}

} // namespace

MomentSequence owco_moments(const OwcoSpec& spec, Vertex x, std::size_t w, std::size_t depth, Guard guard)
{
    spec.validate();
    if (!spec.is_counting()) {
        throw PreconditionError("owco_moments expects counting measure on X; apply counting_reduction first");
    }
    if (w >= spec.base.size()) {
        throw InputError("atom index " + std::to_string(w) + " out of range");
    }
    MomentSequence out;
    out.origin = "vertex " + spec.label(x) + ", atom " + spec.base.atom(w).label;
    out.values.reserve(depth + 1);
    const auto col = static_cast<Eigen::Index>(w);
    for (std::size_t n = 0; n <= depth; ++n) {
        double sum = 0.0;
        for (Vertex y : spec.graph.preimage_fiber(x, n, guard)) {
            double prod = 1.0;
            Vertex z = y;
            for (std::size_t k = 0; k < n; ++k) {
                prod *= std::norm(spec.lambda(static_cast<Eigen::Index>(z), col));
                z = spec.graph.phi(z);
            }
            sum += prod;
        }
        out.values.push_back(sum);
    }
    return out;
}

MomentSequence lambert_moments(const LinearMap& c, const BlockVector& f, std::size_t depth)
{
    if (!c.is_endomorphism()) {
        throw InputError("lambert_moments needs an endomorphism");
    }
    MomentSequence out;
    out.origin = "orbit of a vector";
    BlockVector g = f;
    out.values.push_back(g.squared_norm());
    for (std::size_t n = 1; n <= depth; ++n) {
        g = c.apply(g);
        out.values.push_back(g.squared_norm());
    }
    return out;
}

SupportBound support_bound_detail(const MomentSequence& a)
{
    validate_sequence(a);
    const auto& v = a.values;
    SupportBound out;
    if (v.size() < 3) {
        // Only a_0, a_1: the first-order ratio is the best available bound.
        if (v.size() < 2 || v[0] == 0.0) {
            out.r = (v.size() < 2 || v[1] == 0.0) ? std::optional<double>(0.0) : std::nullopt;
        } else {
            out.r = v[1] / v[0];
        }
        return out;
    }
    double best = 0.0;
    std::vector<double> ratios;
    for (std::size_t n = 0; 2 * n + 2 < v.size(); ++n) {
        double ratio = 0.0;
        if (v[2 * n] == 0.0) {
            if (v[2 * n + 2] > 0.0) {
                return out;
            }
        } else {
            ratio = std::sqrt(v[2 * n + 2] / v[2 * n]);
        }
        ratios.push_back(ratio);
        best = std::max(best, ratio);
    }
    out.r = best;
    out.growing = ratios.size() >= 2 && ratios.back() > ratios[ratios.size() - 2] * (1.0 + 1e-9);
    return out;
}

std::optional<double> support_bound(const MomentSequence& a)
{
    return support_bound_detail(a).r;
}

StieltjesVerdict stieltjes_test(const MomentSequence& a, double tol)
{
    if (a.values.size() < 2) {
        throw InputError("Stieltjes test needs at least a_0 and a_1");
    }
    validate_sequence(a);
    StieltjesVerdict out;
    out.tolerance_used = tol;
    out.depth = a.depth();
    out.support_bound = support_bound(a);

    const Scaled s = prescale(a, out.support_bound);
    out.prescale = s.prescale;
    const std::size_t n = a.depth();
    const std::size_t k0 = n / 2 + 1;
    const std::size_t k1 = (n + 1) / 2;
    const Eigen::MatrixXd h0 = hankel(s.b, k0, 0);
    const Eigen::MatrixXd h1 = hankel(s.b, k1, 1);
    out.min_eig_h0 = min_eig(h0);
    out.min_eig_h1 = min_eig(h1);
    out.is_stieltjes = psd_at(h0, tol) && psd_at(h1, tol);

    if (!out.is_stieltjes) {
        const std::pair<const char*, std::size_t> forms[] = {{"H0", 0}, {"H1", 1}};
        for (const auto& [name, shift] : forms) {
            const std::size_t order = shift == 0 ? k0 : k1;
            for (std::size_t k = 1; k <= order && !out.witness; ++k) {
                const Eigen::MatrixXd block = hankel(s.b, k, shift);
                if (!psd_at(block, tol)) {
                    HankelWitness wit;
                    wit.matrix = name;
                    wit.order = k;
                    wit.determinant = hankel(a.values, k, shift).determinant();
                    wit.min_eigenvalue = min_eig(block);
                    out.witness = wit;
                }
            }
            if (out.witness) {
                break;
            }
        }
    }
    return out;
}

GridMeasure recover_atomic_measure(const MomentSequence& a, double tol)
{
    const StieltjesVerdict verdict = stieltjes_test(a, tol);
    if (!verdict.is_stieltjes) {
        std::ostringstream msg;
        msg << "sequence (" << a.origin << ") fails the Stieltjes test: min eigenvalues " << verdict.min_eig_h0
            << " / " << verdict.min_eig_h1;
        throw NotStieltjesError(msg.str());
    }
    const double a0 = a.values[0];
    const auto finish = [a0](std::vector<double> grid, std::vector<double> weights) {
        if (std::abs(a0 - 1.0) <= probability_tolerance) {
            double total = 0.0;
            for (double w : weights) {
                total += w;
            }
            for (double& w : weights) {
                w /= total;
            }
            return GridMeasure(std::move(grid), std::move(weights));
        }
        return GridMeasure(std::move(grid), std::move(weights), GridMeasure::Kind::finite);
    };
    if (a0 == 0.0) {
        return GridMeasure({0.0}, {0.0}, GridMeasure::Kind::finite);
    }
    const double r = verdict.support_bound.value_or(0.0);
    if (r == 0.0) {
        return finish({0.0}, {a0});
    }

    const Scaled s = prescale(a, verdict.support_bound);
    const std::size_t n = a.depth();
    const std::size_t k0 = n / 2 + 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hankel(s.b, k0, 0), Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = eig.eigenvalues().reverse(); // descending
    const double top = ev[0];
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] / top > tol) {
            ++rank;
        }
    }
    const double last_kept = ev[static_cast<Eigen::Index>(rank) - 1] / top;
    const double first_dropped = rank < k0 ? std::max(ev[static_cast<Eigen::Index>(rank)] / top, 0.0) : 0.0;
    if (last_kept - first_dropped < 10.0 * tol) {
        std::ostringstream msg;
        msg << "Hankel rank of (" << a.origin << ") is ambiguous: eigenvalue ratios " << last_kept << " and "
            << first_dropped << " straddle the cut " << tol;
        throw IndeterminateRankError(msg.str());
    }
    const std::size_t m = std::min(rank, (n + 1) / 2);
    if (m == 0) {
        throw IndeterminateRankError("not enough moments to place a single atom");
    }

    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    chebyshev(s.b, m, alpha, beta);
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    if (m == 1) {
        nodes = alpha;
        weights = beta.head(1);
    } else {
        Eigen::VectorXd sub = beta.tail(m - 1).cwiseSqrt();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> jac;
        jac.computeFromTridiagonal(alpha, sub, Eigen::ComputeEigenvectors);
        if (jac.info() != Eigen::Success) {
            throw NumericalError("Jacobi matrix eigendecomposition failed");
        }
        nodes = jac.eigenvalues();
        weights = beta[0] * jac.eigenvectors().row(0).transpose().cwiseAbs2();
    }
    polish(s.b, nodes, weights);

    std::vector<std::pair<double, double>> atoms;
    for (Eigen::Index j = 0; j < nodes.size(); ++j) {
        double tau = nodes[j];
        if (tau < -tol) {
            std::ostringstream msg;
            msg << "recovered node " << tau * r << " of (" << a.origin << ") is negative";
            throw NotStieltjesError(msg.str());
        }
        tau = std::max(tau, 0.0);
        atoms.emplace_back(tau * r, weights[j] * a0);
    }
    std::sort(atoms.begin(), atoms.end());

    const double radius = 1e-8 * std::max(1.0, r);
    std::vector<double> grid;
    std::vector<double> mass;
    for (const auto& [t, w] : atoms) {
        if (!grid.empty() && t - grid.back() <= radius) {
            const double total = mass.back() + w;
            grid.back() = total > 0.0 ? (grid.back() * mass.back() + t * w) / total : grid.back();
            mass.back() = total;
        } else {
            grid.push_back(t);
            mass.push_back(w);
        }
    }
    for (double& w : mass) {
        if (w < 0.0) {
            if (w < -tol * a0) {
                throw NotStieltjesError("recovered a negative weight for (" + a.origin + ")");
            }
            w = 0.0;
        }
    }
    return finish(std::move(grid), std::move(mass));
}

} // namespace owco
