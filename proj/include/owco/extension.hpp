#pragma once

#include "owco/moments.hpp"
#include "owco/operators.hpp"
#include "owco/spaces.hpp"

#include <optional>
#include <string>
#include <vector>

namespace owco {

/// theta_x^w for every (x, w), all on one shared grid S.
class ThetaFamily {
public:
    /// weights row x * atoms + w holds theta_x^w over the grid; every row must be a probability vector.
    ThetaFamily(std::size_t vertices, std::size_t atoms, std::vector<double> grid, Eigen::MatrixXd weights);

    /// Same measure at every (x, w).
    static ThetaFamily constant(std::size_t vertices, std::size_t atoms, const GridMeasure& m);

    std::size_t vertices() const { return vertices_; }
    std::size_t atoms() const { return atoms_; }
    std::size_t grid_size() const { return grid_.size(); }
    const std::vector<double>& grid() const { return grid_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    double weight(Vertex x, std::size_t w, std::size_t s) const
    {
        return weights_(static_cast<Eigen::Index>(x * atoms_ + w), static_cast<Eigen::Index>(s));
    }
    GridMeasure measure(Vertex x, std::size_t w) const;
    std::vector<GridMeasure> row(Vertex x) const;

private:
    std::size_t vertices_;
    std::size_t atoms_;
    std::vector<double> grid_;
    Eigen::MatrixXd weights_;
};

struct AtomRef {
    Vertex x = 0;
    std::size_t w = 0;
    std::size_t s = 0;
};

struct ConditionsReport {
    bool condition_a = true; // automatic on an atomic W
    bool condition_b = true;
    std::size_t violation_count = 0;
    std::vector<AtomRef> violations; // first few witnesses
};

/// (B): lambda_x(w) != 0 and theta_x^w{s} > 0 imply theta_phi(x)^w{s} > 0.
ConditionsReport check_conditions(const OwcoSpec& spec, const ThetaFamily& theta);

struct GTable {
    std::size_t vertices = 0;
    std::size_t atoms = 0;
    std::size_t grid = 0;
    std::vector<double> values; // index (x * atoms + w) * grid + s
    std::vector<bool> null;     // theta_x^w{s} = 0
    bool finite = true;

    double at(Vertex x, std::size_t w, std::size_t s) const { return values[(x * atoms + w) * grid + s]; }
    bool is_null(Vertex x, std::size_t w, std::size_t s) const { return null[(x * atoms + w) * grid + s]; }
    /// Values laid out over the extension space.
    Eigen::VectorXcd as_vector() const;
};

/// G_x(w, s) = sum over y in the fiber of x of |lambda_y(w)|^2 theta_y^w{s} / theta_x^w{s}.
/// Needs counting measure on X and a family satisfying (B).
GTable compute_G(const OwcoSpec& spec, const ThetaFamily& theta);

/// | sum_y sum_{w,s} |lambda_y|^2 |F|^2 rho theta_y  -  sum_{w,s} G_x |F|^2 rho theta_x | for one vertex.
double fiber_integral_residual(const OwcoSpec& spec, const ThetaFamily& theta, const GTable& g, Vertex x,
                               const Eigen::MatrixXcd& f);

struct ConsistencyReport {
    double residual = 0.0; // max |lambda_x| |G_phi(x) - G_x| over non-null atoms
    std::optional<AtomRef> worst;
    bool finite = true;
    bool passes = true;
    std::size_t skipped_vertices = 0; // frontier vertices of a truncation
};

ConsistencyReport consistency_check(const OwcoSpec& spec, const ThetaFamily& theta, const GTable& g, double tol);

struct Extension {
    SpacePtr base_space;
    SpacePtr hat_space; // block x, atom w * |S| + s, mass rho(w) theta_x^w{s}
    WcoSystem hat_system;
    LinearMap c;
    LinearMap c_hat;
    LinearMap q; // (Q f)_x(w, s) = f_x(w)
};

Extension build_extension(const OwcoSpec& spec, const ThetaFamily& theta);

/// || C_hat* C_hat - M_G ||.
double verify_CstarC(const Extension& ext, const GTable& g);

struct ToleranceCascade {
    double tol = 0.0;
    double consistency = 0.0;
    double defect = 0.0;
    double cstar_c = 0.0;
    double embedding = 0.0;
    double commutator = 0.0;
};

struct SubnormalityCertificate {
    bool counting_reduced = false;
    ConditionsReport conditions;
    std::optional<bool> g_finite;
    std::optional<ConsistencyReport> consistency;
    std::optional<double> norm_c_hat;
    std::optional<double> extension_defect; // QQQ defect of C_hat on interior rows
    std::optional<double> defect_constant;  // defect <= constant * consistency residual
    std::optional<double> polar_defect;
    std::optional<bool> polar_quasinormal;
    std::optional<double> cstar_c_residual;
    std::optional<double> embedding_residual; // || C_hat Q - Q C ||
    std::optional<double> isometry_residual;  // || Q* Q - I ||
    std::optional<double> commutator_residual; // || M_sqrtG C_hat - C_hat M_sqrtG ||
    std::optional<double> resolvent_norm;      // || (z0 - M_sqrtG)^-1 || at z0 = -1
    std::optional<bool> second_route_quasinormal;
    bool internal_inconsistency = false;
    std::size_t frontier_vertices = 0;
    ToleranceCascade cascade;
    std::string verdict; // certified-subnormal | refuted-hypotheses | numerical-indeterminate
    std::vector<std::string> notes;
};

SubnormalityCertificate certify_subnormality(const OwcoSpec& spec, const ThetaFamily& theta, double tol);

struct AtomRecovery {
    Vertex x = 0;
    std::size_t w = 0;
    std::string status; // recovered | zero-tail | truncated | not-stieltjes | indeterminate
    std::size_t depth = 0;
    MomentSequence moments;
    std::optional<StieltjesVerdict> verdict;
    std::optional<double> support_bound;
    bool support_growing = false;
    bool within_norm_bound = true;
    std::vector<double> atoms;
    std::vector<double> weights;
    std::string message;
};

struct NecessityReport {
    bool counting_reduced = false;
    std::size_t depth = 0;
    double norm_c_sq = 0.0;
    std::vector<AtomRecovery> entries;
    std::optional<ThetaFamily> theta;
    double recurrence_residual = 0.0; // theta recurrence, max over complete vertices and atoms
    std::size_t recurrence_checked = 0;
    double g_step_residual = 0.0;   // |lambda_x| |G_phi(x) - G_x| on the assembled family
    double g_equals_t_residual = 0.0;
    std::size_t complete_vertices = 0;
    double merge_radius = 0.0;
    double recurrence_tolerance = 0.0;
    std::string verdict; // not-subnormal | numerical-indeterminate | necessary-conditions-hold
    std::optional<AtomRecovery> witness;
    std::vector<std::string> notes;
};

NecessityReport necessity_extract(const OwcoSpec& spec, std::size_t depth, double tol);

struct WcoReport {
    std::vector<std::optional<double>> cc_residual; // per vertex; empty on the frontier
    double max_cc_residual = 0.0;
    std::optional<Vertex> worst_vertex;
    bool integrable = true; // finite first moment, automatic on a finite grid
    bool q_probability = true;
    std::optional<SubnormalityCertificate> certificate;
    std::optional<double> g_equals_t_residual;
    std::string verdict; // certified-subnormal | cc-violated | ... (certificate verdicts)
};

/// Scalar weighted composition operator C_{phi,w} on L^2(mu) with measures Q_x on one grid.
WcoReport wco_reduce(const FunctionalGraph& graph, const std::vector<double>& mu, const Eigen::VectorXcd& w,
                     const std::vector<GridMeasure>& q, double tol);

} // namespace owco
