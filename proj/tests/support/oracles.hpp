#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fmsync/netgraph.hpp"
#include "fmsync/types.hpp"

// Reference computations written independently of the library code they check.
namespace oracle {

using fmsync::Mat;
using fmsync::Vec;

/// Solves P A + A^T P = -R entry by entry: one linear equation per (i, j), dense QR.
Mat lyapunov(const Mat& A, const Mat& R);

/// Reachability by depth-first search from every candidate root (edge j -> i when a_ij > 0).
bool spanning_tree(const Mat& adjacency);

/// Random digraph on n nodes; each off-diagonal a_ij is present with probability `density`
/// and weighted k/8 for k uniform in 1..8.
Mat random_digraph(std::mt19937_64& rng, int n, double density);

/// exp(S t) for S = [[0, s], [-s, 0]].
Mat rotation_exp(double s, double t);

/// Largest |a - b| entry.
double max_abs_diff(const Mat& a, const Mat& b);

}  // namespace oracle
