#include "fmsync/netgraph.hpp"

#include <cmath>
#include <sstream>

#include "fmsync/errors.hpp"

namespace fmsync {

NetworkTopology build_topology(const Mat& adjacency) {
    if (adjacency.rows() != adjacency.cols() || adjacency.rows() == 0) {
        std::ostringstream os;
        os << "adjacency must be a nonempty square matrix, got " << adjacency.rows() << "x" << adjacency.cols();
        throw Error(ErrorKind::InvalidAdjacency, os.str());
    }
    const int n = static_cast<int>(adjacency.rows());
    NetworkTopology topo;
    topo.adjacency_ = adjacency;
    topo.laplacian_ = Mat::Zero(n, n);
    topo.neighbors_.assign(n, {});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = adjacency(i, j);
            if (!std::isfinite(a) || a < 0.0) {
                std::ostringstream os;
                os << "entry (" << i + 1 << "," << j + 1 << ") = " << a << " is not a nonnegative number";
                throw Error(ErrorKind::InvalidAdjacency, os.str());
            }
            if (i == j) {
                if (a != 0.0) {
                    std::ostringstream os;
                    os << "diagonal entry " << i + 1 << " is nonzero";
                    throw Error(ErrorKind::InvalidAdjacency, os.str());
                }
                continue;
            }
            if (a > 0.0) {
                topo.laplacian_(i, j) = -a;
                topo.neighbors_[i].push_back({j, a});
                topo.edges_.push_back({i, j, a});
            }
        }
        // l_ii = -sum_{j != i} l_ij, so the row sum is exactly zero in floating point
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) off += topo.laplacian_(i, j);
        }
        topo.laplacian_(i, i) = -off;
    }
    return topo;
}

NetworkTopology topology_from_edges(int n, std::span<const Edge> edges) {
    if (n <= 0) throw Error(ErrorKind::InvalidAdjacency, "graph must have at least one node");
    Mat a = Mat::Zero(n, n);
    for (const Edge& e : edges) {
        if (e.receiver < 0 || e.receiver >= n || e.source < 0 || e.source >= n) {
            std::ostringstream os;
            os << "edge " << e.receiver + 1 << "<-" << e.source + 1 << " is out of range for n=" << n;
            throw Error(ErrorKind::InvalidAdjacency, os.str());
        }
        a(e.receiver, e.source) = e.weight;
    }
    return build_topology(a);
}

NetworkTopology default_topology() {
    // receiver <- source, 1-based: 3<-1, 2<-3, 4<-3, 5<-3, 4<-5, 1<-2, 6<-5
    static const Edge edges[] = {{2, 0, 1.0}, {1, 2, 1.0}, {3, 2, 1.0}, {4, 2, 1.0},
                                 {3, 4, 1.0}, {0, 1, 1.0}, {5, 4, 1.0}};
    return topology_from_edges(6, edges);
}

bool has_spanning_tree(const NetworkTopology& topology) {
    const int n = topology.size();
    // out[j] lists the agents that receive from j
    std::vector<std::vector<int>> out(n);
    for (const Edge& e : topology.edges()) out[e.source].push_back(e.receiver);

    std::vector<int> stack;
    std::vector<char> seen(n);
    for (int root = 0; root < n; ++root) {
        std::fill(seen.begin(), seen.end(), 0);
        stack.assign(1, root);
        seen[root] = 1;
        int reached = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : out[v]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    stack.push_back(w);
                }
            }
        }
        if (reached == n) return true;
    }
    return false;
}

Mat LaplacianDecomposition::T() const {
    const Eigen::Index n = r.size();
    Mat t(n, n);
    t.row(0) = r.transpose();
    t.bottomRows(n - 1) = W;
    return t;
}

Mat LaplacianDecomposition::T_inverse() const {
    const Eigen::Index n = r.size();
    Mat t(n, n);
    t.col(0) = Vec::Ones(n);
    t.rightCols(n - 1) = U;
    return t;
}

LaplacianDecomposition decompose(const NetworkTopology& topology) {
    if (!has_spanning_tree(topology)) {
        throw Error(ErrorKind::DecompositionUndefined, "graph has no spanning tree, zero is not a simple eigenvalue");
    }
    const int n = topology.size();
    const Mat& L = topology.laplacian();
    LaplacianDecomposition d;

    // left null vector of L: left singular vector for the smallest singular value
    Eigen::JacobiSVD<Mat> svd(L, Eigen::ComputeFullU);
    Vec r = svd.matrixU().col(n - 1);
    for (int i = 0; i < n; ++i) {
        if (std::abs(r(i)) > 1e-14) {
            if (r(i) < 0.0) r = -r;
            break;
        }
    }
    const double total = r.sum();
    if (!(std::abs(total) > 1e-12)) {
        throw Error(ErrorKind::NumericalConditioning, "left null vector is orthogonal to the ones vector");
    }
    d.r = r / total;

    // W: orthonormal rows spanning the complement of span{1}
    const Mat ones = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
    Eigen::HouseholderQR<Mat> qr(ones);
    const Mat Q = qr.householderQ() * Mat::Identity(n, n);
    d.W = Q.rightCols(n - 1).transpose();

    const Mat T = d.T();
    Eigen::JacobiSVD<Mat> tsvd(T);
    const auto& sv = tsvd.singularValues();
    const double cond = sv(0) / sv(n - 1);
    if (!(cond < 1e12)) {
        std::ostringstream os;
        os << "transformation T is ill-conditioned (cond=" << cond << ")";
        throw Error(ErrorKind::NumericalConditioning, os.str());
    }
    const Mat Tinv = T.fullPivLu().inverse();
    d.U = Tinv.rightCols(n - 1);
    d.H = d.W * L * d.U;
    return d;
}

}  // namespace fmsync
