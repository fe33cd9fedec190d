#include "owco/gallery.hpp"

#include "owco/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace owco {

namespace {

class Params {
public:
    Params(std::string gallery, const GalleryParams& raw, std::set<std::string> known)
        : gallery_(std::move(gallery)), raw_(raw)
    {
        for (const auto& [key, value] : raw_) {
            if (!known.count(key)) {
                throw InputError("gallery " + gallery_ + " has no parameter '" + key + "'");
            }
        }
    }

    bool has(const std::string& key) const { return raw_.count(key) > 0; }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        const auto it = raw_.find(key);
        return it == raw_.end() ? fallback : it->second;
    }

    double real(const std::string& key, double fallback) const
    {
        const auto it = raw_.find(key);
        if (it == raw_.end()) {
            return fallback;
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) {
                throw std::invalid_argument("trailing text");
            }
            return v;
        } catch (const std::exception&) {
            throw InputError("gallery " + gallery_ + ": parameter " + key + "='" + it->second + "' is not a number");
        }
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1) const
    {
        const double v = real(key, static_cast<double>(fallback));
        if (v < static_cast<double>(min) || v != std::floor(v) || v > 1e6) {
            throw InputError("gallery " + gallery_ + ": parameter " + key + " must be an integer >= " +
                             std::to_string(min));
        }
        return static_cast<std::size_t>(v);
    }

    std::vector<double> list(const std::string& key, std::vector<double> fallback) const
    {
        const auto it = raw_.find(key);
        if (it == raw_.end()) {
            return fallback;
        }
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw InputError("gallery " + gallery_ + ": parameter " + key + " must be a comma-separated list");
            }
        }
        return out;
    }

private:
    std::string gallery_;
    const GalleryParams& raw_;
};

DiscreteMeasureSpace single_atom()
{
    return DiscreteMeasureSpace({Atom{"1", Complex{1.0, 0.0}, 1.0}});
}

std::vector<std::string> index_labels(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(std::to_string(i));
    }
    return out;
}

OwcoSpec shift_spec(std::size_t n_max, const std::vector<double>& weights)
{
    std::vector<Vertex> phi(n_max + 1);
    std::vector<bool> cut(n_max + 1, false);
    Eigen::MatrixXcd lambda = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_max + 1), 1);
    for (std::size_t v = 0; v <= n_max; ++v) {
        phi[v] = v == 0 ? 0 : v - 1;
        lambda(static_cast<Eigen::Index>(v), 0) = weights[v];
    }
    cut[n_max] = true;
    return OwcoSpec{FunctionalGraph(phi, cut), single_atom(), lambda, std::nullopt, index_labels(n_max + 1)};
}

Scenario shift_gallery(const Params& p, bool wco)
{
    const std::string kind = wco ? "sqrt_n" : p.text("weights", "sqrt_n");
    Scenario sc;
    if (kind == "sqrt_n") {
        const std::size_t n_max = p.count("n", 7);
        const std::size_t m = p.count("m", 4);
        std::vector<double> weights(n_max + 1);
        for (std::size_t v = 1; v <= n_max; ++v) {
            weights[v] = std::sqrt(static_cast<double>(v));
        }
        sc.spec = shift_spec(n_max, weights);
        sc.theta = shift_recursion_theta(n_max, m, &sc.notes);
        sc.task = wco ? "wco" : "check";
        sc.depth = n_max;
        sc.name = std::string(wco ? "wco_shift" : "shift_sqrt_n") + "_n" + std::to_string(n_max) + "_m" +
                  std::to_string(m);
        if (n_max + 1 > 2 * m) {
            sc.notes.push_back("vertices beyond 2m - 1 use renormalized recursion measures");
        }
    } else if (kind == "periodic") {
        const std::size_t n_max = p.count("n", 8);
        std::vector<double> weights(n_max + 1);
        for (std::size_t v = 1; v <= n_max; ++v) {
            weights[v] = v % 2 == 1 ? std::sqrt(2.0) : 1.0;
        }
        sc.spec = shift_spec(n_max, weights);
        sc.task = "necessity";
        sc.depth = n_max;
        sc.name = "shift_periodic_n" + std::to_string(n_max);
    } else {
        throw InputError("gallery shift: weights must be sqrt_n or periodic, got '" + kind + "'");
    }
    return sc;
}

Scenario branching_loop(const Params& p)
{
    const std::vector<double> beta = p.list("beta", {0.6, 0.3, 0.1});
    const std::size_t k = p.count("k", beta.size());
    if (beta.size() != k) {
        throw InputError("gallery branching_loop: beta has " + std::to_string(beta.size()) + " entries for k = " +
                         std::to_string(k));
    }
    const std::size_t depth = p.count("depth", 4);
    const std::size_t m = p.count("m", 16);
    double sum = 0.0;
    for (double b : beta) {
        sum += b * b;
    }
    const std::size_t n = 1 + k * depth;
    std::vector<Vertex> phi(n, 0);
    std::vector<bool> cut(n, false);
    std::vector<std::string> labels(n);
    Eigen::MatrixXcd lambda = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), 1);
    labels[0] = "(0,0)";
    const auto id = [depth](std::size_t level, std::size_t branch) { return 1 + (branch - 1) * depth + (level - 1); };
    for (std::size_t b = 1; b <= k; ++b) {
        for (std::size_t level = 1; level <= depth; ++level) {
            const std::size_t v = id(level, b);
            labels[v] = "(" + std::to_string(level) + "," + std::to_string(b) + ")";
            phi[v] = level == 1 ? 0 : id(level - 1, b);
            lambda(static_cast<Eigen::Index>(v), 0) = level == 1 ? beta[b - 1] : std::sqrt(sum);
            cut[v] = level == depth;
        }
    }
    std::vector<double> grid(m);
    std::vector<double> weights(m, 1.0 / static_cast<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
        grid[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    }
    Scenario sc;
    sc.name = "branching_loop_k" + std::to_string(k) + "_d" + std::to_string(depth);
    sc.spec = OwcoSpec{FunctionalGraph(phi, cut), single_atom(), lambda, std::nullopt, labels};
    sc.theta = ThetaFamily::constant(n, 1, GridMeasure(grid, weights));
    sc.depth = depth;
    sc.notes.push_back("uniform measure on [0,1] replaced by the " + std::to_string(m) + "-point midpoint grid");
    return sc;
}

Scenario wco_identity(const Params& p)
{
    const std::size_t n = p.count("n", 3);
    std::vector<Vertex> phi(n);
    for (std::size_t v = 0; v < n; ++v) {
        phi[v] = v;
    }
    Scenario sc;
    sc.name = "wco_identity_n" + std::to_string(n);
    sc.task = "wco";
    sc.spec = OwcoSpec{FunctionalGraph(phi), single_atom(), Eigen::MatrixXcd::Ones(static_cast<Eigen::Index>(n), 1),
                       std::nullopt, index_labels(n)};
    sc.theta = ThetaFamily::constant(n, 1, GridMeasure::dirac(1.0));
    sc.depth = 4;
    return sc;
}

} // namespace

const std::vector<std::string>& gallery_names()
{
    static const std::vector<std::string> names = {"kary", "shift", "branching_loop", "wco_identity", "wco_shift"};
    return names;
}

GalleryParams parse_params(const std::vector<std::string>& pairs)
{
    GalleryParams out;
    for (const auto& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw InputError("parameter '" + p + "' is not of the form key=value");
        }
        out[p.substr(0, eq)] = p.substr(eq + 1);
    }
    return out;
}

std::vector<Atom> kary_default_atoms()
{
    const double third = std::numbers::pi / 3.0;
    return {
        Atom{"w1", Complex{std::sqrt(0.5), 0.0}, 0.5},
        Atom{"w2", std::polar(1.0, third), 0.25},
        Atom{"w3", Complex{0.0, std::sqrt(2.0)}, 0.25},
    };
}

Scenario kary_scenario(std::size_t k, std::size_t depth, const std::vector<Atom>& atoms)
{
    if (k == 0 || depth == 0) {
        throw InputError("k-ary construction needs k >= 1 and depth >= 1");
    }
    std::size_t n = 1;
    for (std::size_t i = 0; i < depth; ++i) {
        n *= k;
        if (n > 200000) {
            throw InputError("k-ary truncation too large");
        }
    }
    const std::size_t high = n / k; // k^(depth-1)
    std::vector<Vertex> phi(n);
    std::vector<bool> cut(n, false);
    std::vector<std::string> labels(n);
    for (std::size_t v = 0; v < n; ++v) {
        // digits of v in base k, most significant first; the word uses symbols 1..k
        std::string label;
        std::size_t rest = v;
        std::vector<std::size_t> digits(depth);
        for (std::size_t i = depth; i-- > 0;) {
            digits[i] = rest % k;
            rest /= k;
        }
        for (std::size_t i = 0; i < depth; ++i) {
            if (k > 9 && i > 0) {
                label += '.';
            }
            label += std::to_string(digits[i] + 1);
        }
        labels[v] = label;
        phi[v] = (v % high) * k;
        cut[v] = digits[depth - 1] != 0;
    }

    const std::size_t m = atoms.size();
    Eigen::MatrixXcd lambda(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    std::vector<double> grid;
    for (std::size_t w = 0; w < m; ++w) {
        lambda.col(static_cast<Eigen::Index>(w)).setConstant(atoms[w].value);
        grid.push_back(static_cast<double>(k) * std::norm(atoms[w].value));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t w = 0; w < m; ++w) {
        const double t = static_cast<double>(k) * std::norm(atoms[w].value);
        const auto s = std::find(grid.begin(), grid.end(), t) - grid.begin();
        for (std::size_t v = 0; v < n; ++v) {
            weights(static_cast<Eigen::Index>(v * m + w), s) = 1.0;
        }
    }

    Scenario sc;
    sc.name = "kary_k" + std::to_string(k) + "_d" + std::to_string(depth);
    sc.spec = OwcoSpec{FunctionalGraph(phi, cut), DiscreteMeasureSpace(atoms), lambda, std::nullopt, labels};
    sc.theta.emplace(n, m, grid, weights);
    sc.depth = depth;
    return sc;
}

ThetaFamily shift_recursion_theta(std::size_t n_max, std::size_t m, std::vector<std::string>* notes)
{
    MomentSequence fact;
    fact.origin = "n!";
    double f = 1.0;
    for (std::size_t n = 0; n < 2 * m; ++n) {
        if (n > 0) {
            f *= static_cast<double>(n);
        }
        fact.values.push_back(f);
    }
    const GridMeasure theta0 = recover_atomic_measure(fact, default_tol);
    const std::size_t k = theta0.size();
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(n_max + 1), static_cast<Eigen::Index>(k));
    for (std::size_t s = 0; s < k; ++s) {
        weights(0, static_cast<Eigen::Index>(s)) = theta0.weight(s);
    }
    double worst = 0.0;
    for (std::size_t l = 1; l <= n_max; ++l) {
        for (std::size_t s = 0; s < k; ++s) {
            weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(s)) =
                theta0.point(s) * weights(static_cast<Eigen::Index>(l - 1), static_cast<Eigen::Index>(s)) /
                static_cast<double>(l);
        }
        const double total = weights.row(static_cast<Eigen::Index>(l)).sum();
        worst = std::max(worst, std::abs(total - 1.0));
        weights.row(static_cast<Eigen::Index>(l)) /= total;
    }
    if (notes) {
        std::ostringstream msg;
        msg.precision(3);
        msg << "theta_0 is the " << k << "-point Gauss rule of n!; largest mass correction along the recursion "
            << worst;
        notes->push_back(msg.str());
    }
    return ThetaFamily(n_max + 1, 1, theta0.grid(), weights);
}

Scenario make_gallery(const std::string& name, const GalleryParams& params)
{
    if (name == "kary") {
        const Params p(name, params, {"k", "depth"});
        return kary_scenario(p.count("k", 3), p.count("depth", 4), kary_default_atoms());
    }
    if (name == "shift") {
        return shift_gallery(Params(name, params, {"weights", "n", "m"}), false);
    }
    if (name == "branching_loop") {
        return branching_loop(Params(name, params, {"k", "beta", "depth", "m"}));
    }
    if (name == "wco_identity") {
        return wco_identity(Params(name, params, {"n"}));
    }
    if (name == "wco_shift") {
        return shift_gallery(Params(name, params, {"n", "m"}), true);
    }
    std::string known;
    for (const auto& g : gallery_names()) {
        known += (known.empty() ? "" : ", ") + g;
    }
    throw InputError("unknown gallery '" + name + "' (known: " + known + ")");
}

} // namespace owco
