#pragma once

// Brute-force references and random instance generators shared by the unit
// and acceptance tests. Nothing here calls into the library's algorithms;
// only its plain data types are used.

#include "owco/extension.hpp"
#include "owco/spaces.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using owco::Complex;
using owco::Vertex;
using Rng = std::mt19937_64;

inline Vertex iterate(const std::vector<Vertex>& phi, Vertex x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        x = phi[x];
    }
    return x;
}

/// All y with phi^n(y) = x, by scanning every vertex.
inline std::vector<Vertex> fiber(const std::vector<Vertex>& phi, Vertex x, std::size_t n)
{
    std::vector<Vertex> out;
    for (Vertex y = 0; y < phi.size(); ++y) {
        if (iterate(phi, y, n) == x) {
            out.push_back(y);
        }
    }
    return out;
}

inline bool on_cycle(const std::vector<Vertex>& phi, Vertex x)
{
    Vertex y = x;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        y = phi[y];
        if (y == x) {
            return true;
        }
    }
    return false;
}

/// lambda_y lambda_phi(y) ... lambda_phi^{n-1}(y) at atom w.
inline Complex path_weight(const owco::OwcoSpec& spec, Vertex y, std::size_t w, std::size_t n)
{
    Complex p{1.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        p *= spec.lambda(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(w));
        y = spec.graph.map()[y];
    }
    return p;
}

/// h_x^[n](w) for counting measure on X.
inline double moment(const owco::OwcoSpec& spec, Vertex x, std::size_t w, std::size_t n)
{
    double sum = 0.0;
    for (Vertex y : fiber(spec.graph.map(), x, n)) {
        sum += std::norm(path_weight(spec, y, w, n));
    }
    return sum;
}

/// Vectors are |X| x |W| matrices, f(x, w).
inline Eigen::MatrixXcd apply(const owco::OwcoSpec& spec, const Eigen::MatrixXcd& f)
{
    Eigen::MatrixXcd out(f.rows(), f.cols());
    for (Eigen::Index x = 0; x < f.rows(); ++x) {
        const auto px = static_cast<Eigen::Index>(spec.graph.map()[static_cast<Vertex>(x)]);
        for (Eigen::Index w = 0; w < f.cols(); ++w) {
            out(x, w) = spec.lambda(x, w) * f(px, w);
        }
    }
    return out;
}

inline double norm2(const owco::OwcoSpec& spec, const Eigen::MatrixXcd& f)
{
    double sum = 0.0;
    for (Eigen::Index x = 0; x < f.rows(); ++x) {
        const double mu = spec.vertex_mass ? (*spec.vertex_mass)[static_cast<std::size_t>(x)] : 1.0;
        for (Eigen::Index w = 0; w < f.cols(); ++w) {
            sum += mu * spec.base.mass(static_cast<std::size_t>(w)) * std::norm(f(x, w));
        }
    }
    return sum;
}

/// Row-major flattening matching the library's block index x * |W| + w.
inline Eigen::VectorXcd flatten(const Eigen::MatrixXcd& f)
{
    Eigen::VectorXcd v(f.size());
    for (Eigen::Index x = 0; x < f.rows(); ++x) {
        for (Eigen::Index w = 0; w < f.cols(); ++w) {
            v[x * f.cols() + w] = f(x, w);
        }
    }
    return v;
}

/// G_x(w, s) straight from the definition; NaN where theta_x^w{s} = 0.
inline double g_value(const owco::OwcoSpec& spec, const owco::ThetaFamily& theta, Vertex x, std::size_t w,
                      std::size_t s)
{
    const double tx = theta.weight(x, w, s);
    if (tx == 0.0) {
        return std::nan("");
    }
    double sum = 0.0;
    for (Vertex y : fiber(spec.graph.map(), x, 1)) {
        sum += std::norm(spec.lambda(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(w))) *
               theta.weight(y, w, s);
    }
    return sum / tx;
}

/// max |lambda_x| |G_phi(x) - G_x| over atoms with theta_x^w{s} > 0.
inline double consistency_residual(const owco::OwcoSpec& spec, const owco::ThetaFamily& theta)
{
    double r = 0.0;
    for (Vertex x = 0; x < spec.graph.size(); ++x) {
        for (std::size_t w = 0; w < spec.base.size(); ++w) {
            const double lam = std::abs(spec.lambda(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w)));
            for (std::size_t s = 0; s < theta.grid_size(); ++s) {
                if (theta.weight(x, w, s) > 0.0 && lam > 0.0) {
                    const double d = g_value(spec, theta, spec.graph.map()[x], w, s) - g_value(spec, theta, x, w, s);
                    r = std::max(r, lam * std::abs(d));
                }
            }
        }
    }
    return r;
}

/// sum_i weights_i t_i^n.
inline std::vector<double> measure_moments(const std::vector<double>& t, const std::vector<double>& wt,
                                           std::size_t depth)
{
    std::vector<double> a(depth + 1, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double p = wt[i];
        for (std::size_t n = 0; n <= depth; ++n) {
            a[n] += p;
            p *= t[i];
        }
    }
    return a;
}

// ---------------------------------------------------------------- generators

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Complex phase(Rng& rng)
{
    return std::polar(1.0, uniform(rng, 0.0, 2.0 * M_PI));
}

/// Cycle 0 -> 1 -> ... -> L-1 -> 0 with L >= 2, later vertices hang off
/// earlier ones or close into fixed points.
inline std::vector<Vertex> random_map(Rng& rng, std::size_t n)
{
    const std::size_t len = pick(rng, 2, std::min<std::size_t>(4, n));
    std::vector<Vertex> phi(n);
    for (Vertex v = 0; v < len; ++v) {
        phi[v] = (v + 1) % len;
    }
    for (Vertex v = len; v < n; ++v) {
        phi[v] = uniform(rng, 0.0, 1.0) < 0.15 ? v : pick(rng, 0, v - 1);
    }
    return phi;
}

inline std::vector<double> random_grid(Rng& rng, std::size_t size)
{
    std::vector<double> g;
    double t = uniform(rng, 0.1, 1.0);
    for (std::size_t i = 0; i < size; ++i) {
        g.push_back(t);
        t += uniform(rng, 0.2, 1.2);
    }
    return g;
}

inline std::vector<owco::Atom> random_atoms(Rng& rng, std::size_t m)
{
    std::vector<owco::Atom> atoms;
    for (std::size_t w = 0; w < m; ++w) {
        atoms.push_back(owco::Atom{"w" + std::to_string(w), phase(rng), uniform(rng, 0.2, 2.0)});
    }
    return atoms;
}

/// Random probability vector on a support mask; the mask must be non-empty.
inline Eigen::RowVectorXd random_row(Rng& rng, const std::vector<bool>& support)
{
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) {
        if (support[s]) {
            r[static_cast<Eigen::Index>(s)] = uniform(rng, 0.1, 1.0);
        }
    }
    return r / r.sum();
}

inline std::vector<bool> random_support(Rng& rng, std::size_t size, const std::vector<bool>* within = nullptr)
{
    std::vector<std::size_t> allowed;
    for (std::size_t s = 0; s < size; ++s) {
        if (!within || (*within)[s]) {
            allowed.push_back(s);
        }
    }
    std::vector<bool> out(size, false);
    out[allowed[pick(rng, 0, allowed.size() - 1)]] = true;
    for (std::size_t s : allowed) {
        if (uniform(rng, 0.0, 1.0) < 0.6) {
            out[s] = true;
        }
    }
    return out;
}

struct Instance {
    owco::OwcoSpec spec;
    owco::ThetaFamily theta;
    bool consistent = false;
};

/// lambda vanishes off the cycles, |lambda| is constant along each cycle and
/// theta is constant along each cycle, so G_x = |lambda|^2 there.
inline Instance random_consistent(Rng& rng, std::size_t n, std::size_t m, std::size_t grid_size)
{
    const auto phi = random_map(rng, n);
    const auto grid = random_grid(rng, grid_size);
    Eigen::MatrixXcd lambda = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(grid_size));
    std::vector<bool> done(n, false);
    for (Vertex x = 0; x < n; ++x) {
        if (done[x] || !on_cycle(phi, x)) {
            continue;
        }
        for (std::size_t w = 0; w < m; ++w) {
            const double c = uniform(rng, 0.3, 1.8);
            const Eigen::RowVectorXd row = random_row(rng, random_support(rng, grid_size));
            Vertex y = x;
            do {
                lambda(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(w)) = c * phase(rng);
                weights.row(static_cast<Eigen::Index>(y * m + w)) = row;
                y = phi[y];
            } while (y != x);
        }
        for (Vertex y = phi[x]; y != x; y = phi[y]) {
            done[y] = true;
        }
        done[x] = true;
    }
    for (Vertex x = 0; x < n; ++x) {
        if (!on_cycle(phi, x)) {
            for (std::size_t w = 0; w < m; ++w) {
                weights.row(static_cast<Eigen::Index>(x * m + w)) = random_row(rng, random_support(rng, grid_size));
            }
        }
    }
    owco::OwcoSpec spec{owco::FunctionalGraph(phi), owco::DiscreteMeasureSpace(random_atoms(rng, m)), lambda,
                        std::nullopt, {}};
    return Instance{spec, owco::ThetaFamily(n, m, grid, weights), true};
}

/// Random nonzero lambda; supports shrink along the tree toward the leaves
/// and are shared along cycles, which is what absolute continuity needs.
inline Instance random_general(Rng& rng, std::size_t n, std::size_t m, std::size_t grid_size)
{
    const auto phi = random_map(rng, n);
    const auto grid = random_grid(rng, grid_size);
    Eigen::MatrixXcd lambda(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index x = 0; x < lambda.rows(); ++x) {
        for (Eigen::Index w = 0; w < lambda.cols(); ++w) {
            lambda(x, w) = uniform(rng, 0.2, 2.0) * phase(rng);
        }
    }
    std::vector<std::vector<std::vector<bool>>> support(n, std::vector<std::vector<bool>>(m));
    // Vertices on cycles come first in index order within random_map's layout,
    // and every tree vertex points to a smaller index.
    for (Vertex x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            if (on_cycle(phi, x)) {
                Vertex first = x;
                for (Vertex y = phi[x]; y != x; y = phi[y]) {
                    first = std::min(first, y);
                }
                support[x][w] = first == x ? random_support(rng, grid_size) : support[first][w];
            } else {
                support[x][w] = random_support(rng, grid_size, &support[phi[x]][w]);
            }
        }
    }
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(grid_size));
    for (Vertex x = 0; x < n; ++x) {
        for (std::size_t w = 0; w < m; ++w) {
            weights.row(static_cast<Eigen::Index>(x * m + w)) = random_row(rng, support[x][w]);
        }
    }
    owco::OwcoSpec spec{owco::FunctionalGraph(phi), owco::DiscreteMeasureSpace(random_atoms(rng, m)), lambda,
                        std::nullopt, {}};
    return Instance{spec, owco::ThetaFamily(n, m, grid, weights), false};
}

/// Random spec with positive vertex masses and no truncation.
inline owco::OwcoSpec random_spec(Rng& rng, std::size_t n, std::size_t m, bool masses)
{
    const auto phi = random_map(rng, n);
    Eigen::MatrixXcd lambda(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index x = 0; x < lambda.rows(); ++x) {
        for (Eigen::Index w = 0; w < lambda.cols(); ++w) {
            lambda(x, w) = uniform(rng, 0.0, 1.5) * phase(rng);
        }
    }
    std::optional<std::vector<double>> mu;
    if (masses) {
        mu = std::vector<double>(n);
        for (double& v : *mu) {
            v = uniform(rng, 0.5, 2.0);
        }
    }
    return owco::OwcoSpec{owco::FunctionalGraph(phi), owco::DiscreteMeasureSpace(random_atoms(rng, m)), lambda, mu,
                          {}};
}

inline Eigen::MatrixXcd random_vector(Rng& rng, std::size_t n, std::size_t m)
{
    Eigen::MatrixXcd f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        f.data()[i] = Complex{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    }
    return f;
}

} // namespace oracle
