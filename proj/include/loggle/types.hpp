#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace loggle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;

/// Unordered variable pair, stored with u < v (0-based).
struct Edge
{
    Index u = 0;
    Index v = 0;

    Edge() = default;
    Edge(Index a, Index b) : u(a < b ? a : b), v(a < b ? b : a) {}

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Sorted, duplicate-free set of edges over p variables. Diagonals are implicit.
class EdgeSet
{
public:
    EdgeSet() = default;
    explicit EdgeSet(Index dim) : dim_(dim) {}
    EdgeSet(Index dim, std::vector<Edge> edges);

    Index dim() const { return dim_; }
    std::size_t size() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }

    bool contains(Index u, Index v) const;
    void insert(Index u, Index v);

    const std::vector<Edge>& edges() const { return edges_; }
    auto begin() const { return edges_.begin(); }
    auto end() const { return edges_.end(); }

    /// Off-diagonal support of a matrix, thresholded at exactly zero.
    static EdgeSet support_of(const Matrix& m);

    friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

private:
    Index dim_ = 0;
    std::vector<Edge> edges_;
};

EdgeSet set_intersection(const EdgeSet& a, const EdgeSet& b);

}  // namespace loggle
