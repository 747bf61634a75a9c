#include "loggle/types.hpp"

#include <algorithm>
#include <iterator>

namespace loggle {

EdgeSet::EdgeSet(Index dim, std::vector<Edge> edges) : dim_(dim), edges_(std::move(edges))
{
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool EdgeSet::contains(Index u, Index v) const
{
    return std::binary_search(edges_.begin(), edges_.end(), Edge(u, v));
}

void EdgeSet::insert(Index u, Index v)
{
    const Edge e(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || *it != e) edges_.insert(it, e);
}

EdgeSet EdgeSet::support_of(const Matrix& m)
{
    const auto p = static_cast<Index>(m.rows());
    std::vector<Edge> edges;
    for (Index v = 0; v < p; ++v) {
        for (Index u = 0; u < v; ++u) {
            if (m(u, v) != 0.0 || m(v, u) != 0.0) edges.emplace_back(u, v);
        }
    }
    return EdgeSet(p, std::move(edges));
}

EdgeSet set_intersection(const EdgeSet& a, const EdgeSet& b)
{
    std::vector<Edge> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return EdgeSet(a.dim(), std::move(out));
}

}  // namespace loggle
