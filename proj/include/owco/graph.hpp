#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace owco {

using Vertex = std::size_t;

// Whether a fiber query may run past the truncation frontier.
enum class Guard { enforce, finite_model };

inline constexpr std::size_t unbounded_depth = std::numeric_limits<std::size_t>::max();

/// Self-map of the finite vertex set {0, ..., n-1}.
///
/// Finite truncations of infinite graphs mark their frontier: a vertex is
/// truncated when some of its true preimages were cut away. Depth-n fiber
/// queries that would have to expand a truncated vertex throw BoundaryError
/// instead of returning a clipped set. The vertex set must be closed under
/// the map, so forward iteration never leaves the truncation.
class FunctionalGraph {
public:
    FunctionalGraph() = default;
    explicit FunctionalGraph(std::vector<Vertex> phi, std::vector<bool> truncated = {});

    std::size_t size() const { return phi_.size(); }
    Vertex phi(Vertex x) const;
    const std::vector<Vertex>& map() const { return phi_; }

    /// Level-1 fiber, sorted.
    const std::vector<Vertex>& fiber(Vertex x) const;

    /// {y : phi^n(y) = x}, sorted. Level 0 is {x}.
    std::vector<Vertex> preimage_fiber(Vertex x, std::size_t n, Guard guard = Guard::enforce) const;

    Vertex iterate(Vertex x, std::size_t n) const;

    /// phi(X), sorted.
    std::vector<Vertex> image_set() const;

    bool is_truncated(Vertex x) const;
    bool has_truncation() const { return n_truncated_ > 0; }
    const std::vector<bool>& truncated() const { return truncated_; }

    /// Largest n for which preimage_fiber(x, n) is exact, or unbounded_depth
    /// when no truncated vertex lies behind x.
    std::size_t validity_depth(Vertex x) const;

    /// Graph of phi^n; a vertex is truncated there when its validity depth is below n.
    FunctionalGraph power(std::size_t n) const;

private:
    void check_vertex(Vertex x) const;

    std::vector<Vertex> phi_;
    std::vector<bool> truncated_;
    std::vector<std::vector<Vertex>> fibers_;
    std::vector<std::size_t> validity_;
    std::size_t n_truncated_ = 0;
};

} // namespace owco
