#pragma once

#include "owco/operators.hpp"
#include "owco/spaces.hpp"

#include <optional>
#include <string>
#include <vector>

namespace owco {

struct MomentSequence {
    std::vector<double> values; // a_0 .. a_N
    std::string origin;

    std::size_t depth() const { return values.empty() ? 0 : values.size() - 1; }
};

/// First leading principal block of H0 or H1 that fails the PSD test.
struct HankelWitness {
    std::string matrix; // "H0" or "H1"
    std::size_t order = 0;
    double determinant = 0.0; // of the unscaled block
    double min_eigenvalue = 0.0;
};

struct StieltjesVerdict {
    bool is_stieltjes = false;
    double min_eig_h0 = 0.0; // after prescaling
    double min_eig_h1 = 0.0;
    std::optional<double> support_bound;
    double prescale = 1.0; // a_n was divided by a_0 * prescale^n before the test
    double tolerance_used = 0.0;
    std::size_t depth = 0;
    std::optional<HankelWitness> witness;
};

struct SupportBound {
    std::optional<double> r;
    bool growing = false; // ratios still climbing at the end of the truncation: no uniform r certified
};

/// h_x^[n](w) for n = 0..depth. Needs counting measure on X.
MomentSequence owco_moments(const OwcoSpec& spec, Vertex x, std::size_t w, std::size_t depth,
                            Guard guard = Guard::enforce);

/// a_n = ||C^n f||^2.
MomentSequence lambert_moments(const LinearMap& c, const BlockVector& f, std::size_t depth);

SupportBound support_bound_detail(const MomentSequence& a);
std::optional<double> support_bound(const MomentSequence& a);

StieltjesVerdict stieltjes_test(const MomentSequence& a, double tol);

/// Gauss rule of the moment functional, unscaled back to the input's units.
/// Needs a Stieltjes sequence; atoms closer than 1e-8 max(1, r) are merged.
GridMeasure recover_atomic_measure(const MomentSequence& a, double tol);

} // namespace owco
