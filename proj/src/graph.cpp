#include "owco/graph.hpp"

#include "owco/errors.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace owco {

FunctionalGraph::FunctionalGraph(std::vector<Vertex> phi, std::vector<bool> truncated)
    : phi_(std::move(phi)), truncated_(std::move(truncated))
{
    const std::size_t n = phi_.size();
    if (n == 0) {
        throw InputError("functional graph needs at least one vertex");
    }
    if (truncated_.empty()) {
        truncated_.assign(n, false);
    }
    if (truncated_.size() != n) {
        throw InputError("truncation mask has " + std::to_string(truncated_.size()) +
                         " entries for " + std::to_string(n) + " vertices");
    }
    fibers_.assign(n, {});
    for (Vertex y = 0; y < n; ++y) {
        if (phi_[y] >= n) {
            throw InputError("phi(" + std::to_string(y) + ") = " + std::to_string(phi_[y]) +
                             " is not a vertex");
        }
        fibers_[phi_[y]].push_back(y);
    }
    n_truncated_ = static_cast<std::size_t>(std::count(truncated_.begin(), truncated_.end(), true));

    // Validity depth of x is the backward distance to the nearest truncated vertex.
    validity_.assign(n, unbounded_depth);
    std::deque<Vertex> queue;
    for (Vertex z = 0; z < n; ++z) {
        if (truncated_[z]) {
            validity_[z] = 0;
            queue.push_back(z);
        }
    }
    while (!queue.empty()) {
        const Vertex z = queue.front();
        queue.pop_front();
        const Vertex next = phi_[z];
        if (validity_[next] == unbounded_depth) {
            validity_[next] = validity_[z] + 1;
            queue.push_back(next);
        }
    }
}

void FunctionalGraph::check_vertex(Vertex x) const
{
    if (x >= phi_.size()) {
        throw InputError("vertex " + std::to_string(x) + " out of range (graph has " +
                         std::to_string(phi_.size()) + " vertices)");
    }
}

Vertex FunctionalGraph::phi(Vertex x) const
{
    check_vertex(x);
    return phi_[x];
}

const std::vector<Vertex>& FunctionalGraph::fiber(Vertex x) const
{
    check_vertex(x);
    return fibers_[x];
}

std::vector<Vertex> FunctionalGraph::preimage_fiber(Vertex x, std::size_t n, Guard guard) const
{
    check_vertex(x);
    if (guard == Guard::enforce && n > validity_[x]) {
        throw BoundaryError("preimage fiber of vertex " + std::to_string(x) + " at depth " +
                            std::to_string(n) + " crosses the truncation frontier (valid to depth " +
                            std::to_string(validity_[x]) + ")");
    }
    std::vector<Vertex> level{x};
    for (std::size_t k = 0; k < n && !level.empty(); ++k) {
        std::vector<Vertex> next;
        for (Vertex z : level) {
            next.insert(next.end(), fibers_[z].begin(), fibers_[z].end());
        }
        level = std::move(next);
    }
    std::sort(level.begin(), level.end());
    return level;
}

Vertex FunctionalGraph::iterate(Vertex x, std::size_t n) const
{
    check_vertex(x);
    for (std::size_t k = 0; k < n; ++k) {
        x = phi_[x];
    }
    return x;
}

std::vector<Vertex> FunctionalGraph::image_set() const
{
    std::vector<Vertex> out;
    for (Vertex x = 0; x < phi_.size(); ++x) {
        if (!fibers_[x].empty()) {
            out.push_back(x);
        }
    }
    return out;
}

bool FunctionalGraph::is_truncated(Vertex x) const
{
    check_vertex(x);
    return truncated_[x];
}

std::size_t FunctionalGraph::validity_depth(Vertex x) const
{
    check_vertex(x);
    return validity_[x];
}

FunctionalGraph FunctionalGraph::power(std::size_t n) const
{
    if (n == 0) {
        throw InputError("graph power needs n >= 1");
    }
    std::vector<Vertex> mapped(phi_.size());
    std::vector<bool> cut(phi_.size(), false);
    for (Vertex x = 0; x < phi_.size(); ++x) {
        mapped[x] = iterate(x, n);
        cut[x] = validity_[x] < n;
    }
    return FunctionalGraph(std::move(mapped), std::move(cut));
}

} // namespace owco
