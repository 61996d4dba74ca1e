#pragma once

#include <span>
#include <vector>

#include "fmsync/types.hpp"

namespace fmsync {

/// Directed, weighted edge: `receiver` listens to `source` (source is in N_receiver). Indices are 0-based.
struct Edge {
    int receiver = 0;
    int source = 0;
    double weight = 1.0;
};

struct Neighbor {
    int index = 0;
    double weight = 0.0;
};

/**
 * Directed weighted communication graph.
 *
 * `adjacency()(i, j) = a_ij > 0` means agent i receives from agent j. The
 * Laplacian is assembled entrywise, so every row sums to exactly zero.
 */
class NetworkTopology {
  public:
    NetworkTopology() = default;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(adjacency_.rows()); }
    [[nodiscard]] const Mat& adjacency() const noexcept { return adjacency_; }
    [[nodiscard]] const Mat& laplacian() const noexcept { return laplacian_; }
    /// N_i sorted by source index.
    [[nodiscard]] std::span<const Neighbor> neighbors(int i) const { return neighbors_.at(i); }
    /// All edges ordered by (receiver, source).
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    friend NetworkTopology build_topology(const Mat& adjacency);

  private:
    Mat adjacency_;
    Mat laplacian_;
    std::vector<std::vector<Neighbor>> neighbors_;
    std::vector<Edge> edges_;
};

/// Validates the adjacency (square, nonnegative, zero diagonal) and derives L and N_i.
[[nodiscard]] NetworkTopology build_topology(const Mat& adjacency);
[[nodiscard]] NetworkTopology topology_from_edges(int n, std::span<const Edge> edges);

/// Six-node graph consistent with the observation pattern of the reference network.
[[nodiscard]] NetworkTopology default_topology();

/// True iff some root reaches every node along source -> receiver edges.
[[nodiscard]] bool has_spanning_tree(const NetworkTopology& topology);

/**
 * T = [r^T; W], T^-1 = [1, U], H = W L U so that T L T^-1 = blkdiag(0, H).
 */
struct LaplacianDecomposition {
    Vec r;
    Mat W;
    Mat U;
    Mat H;

    [[nodiscard]] Mat T() const;
    [[nodiscard]] Mat T_inverse() const;
};

[[nodiscard]] LaplacianDecomposition decompose(const NetworkTopology& topology);

}  // namespace fmsync
