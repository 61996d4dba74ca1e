#include "fmsync/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "fmsync/errors.hpp"

namespace fmsync {

namespace {

void require_square(const Mat& A, const char* what) {
    if (A.rows() != A.cols()) {
        std::ostringstream os;
        os << what << " must be square, got " << A.rows() << "x" << A.cols();
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
}

Mat symmetrize(const Mat& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

SymmetricPD::SymmetricPD(const Mat& matrix) : matrix_(symmetrize(matrix)) {
    require_square(matrix_, "SymmetricPD");
    if (matrix_.size() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "SymmetricPD of empty matrix");
    }
    Eigen::LLT<Mat> llt(matrix_);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalConditioning, "matrix is not positive definite");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(matrix_, Eigen::EigenvaluesOnly);
    eig_min_ = es.eigenvalues().minCoeff();
    eig_max_ = es.eigenvalues().maxCoeff();
    if (!(eig_min_ > 0.0)) {
        throw Error(ErrorKind::NumericalConditioning, "matrix is not positive definite");
    }
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Mat lyapunov_kronecker(const Mat& A, const Mat& R) {
    require_square(A, "A");
    require_square(R, "R");
    if (A.rows() != R.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "Lyapunov A and R sizes differ");
    }
    const Eigen::Index k = A.rows();
    const Mat I = Mat::Identity(k, k);
    // vec(P A) = (A^T (x) I) vec P, vec(A^T P) = (I (x) A^T) vec P
    const Mat op = kron(I, A.transpose()) + kron(A.transpose(), I);
    const Vec rhs = -Eigen::Map<const Vec>(R.data(), k * k);

    Eigen::PartialPivLU<Mat> lu(op);
    const double rcond = lu.rcond();
    if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
        std::ostringstream os;
        os << "Lyapunov operator is singular (rcond=" << rcond << ")";
        throw Error(ErrorKind::NumericalConditioning, os.str());
    }
    Vec x = lu.solve(rhs);
    // one step of iterative refinement
    x += lu.solve(rhs - op * x);
    return symmetrize(Eigen::Map<const Mat>(x.data(), k, k));
}

double lyapunov_residual(const Mat& P, const Mat& A, const Mat& R) {
    return (P * A + A.transpose() * P + R).norm();
}

SymmetricPD solve_lyapunov(const Mat& A, const Mat& R, const LyapunovOptions& options) {
    require_square(A, "A");
    if (!is_hurwitz(A)) {
        std::ostringstream os;
        os << "A is not Hurwitz (spectral abscissa " << spectral_abscissa(A) << ")";
        throw Error(ErrorKind::NoStableSolution, os.str());
    }
    const Mat P = lyapunov_kronecker(A, R);
    const double residual = lyapunov_residual(P, A, R);
    if (!(residual < options.tolerance * (1.0 + R.norm()))) {
        std::ostringstream os;
        os << "Lyapunov residual " << residual << " exceeds tolerance";
        throw Error(ErrorKind::NumericalConditioning, os.str());
    }
    return SymmetricPD(P);
}

double riccati_residual(const Mat& G, const Mat& S, const Mat& B, double lambda_star, double epsilon) {
    const Eigen::Index p = S.rows();
    return (S.transpose() * G + G * S - lambda_star * G * B * B.transpose() * G + epsilon * Mat::Identity(p, p))
        .norm();
}

bool is_stabilizable(const Mat& S, const Mat& B) {
    require_square(S, "S");
    const Eigen::Index p = S.rows();
    const CVec lambdas = eigenvalues_general(S);
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        if (lambdas(i).real() < 0.0) continue;
        Eigen::MatrixXcd pbh(p, p + B.cols());
        pbh.leftCols(p) = S.cast<std::complex<double>>() - lambdas(i) * Eigen::MatrixXcd::Identity(p, p);
        pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(pbh);
        lu.setThreshold(1e-10);
        if (lu.rank() < p) return false;
    }
    return true;
}

namespace {

// Stable invariant subspace of the Hamiltonian [[S, -R], [-eps I, -S^T]].
bool hamiltonian_seed(const Mat& S, const Mat& R, double epsilon, Mat& G) {
    const Eigen::Index p = S.rows();
    Mat Z(2 * p, 2 * p);
    Z << S, -R, -epsilon * Mat::Identity(p, p), -S.transpose();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Z.cast<std::complex<double>>());
    if (es.info() != Eigen::Success) return false;

    Eigen::MatrixXcd X(2 * p, p);
    Eigen::Index found = 0;
    for (Eigen::Index i = 0; i < 2 * p && found < p; ++i) {
        if (es.eigenvalues()(i).real() < 0.0) X.col(found++) = es.eigenvectors().col(i);
    }
    if (found != p) return false;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(X.topRows(p));
    if (!lu.isInvertible()) return false;
    const Eigen::MatrixXcd Gc = X.bottomRows(p) * lu.inverse();
    if (!Gc.allFinite()) return false;
    G = symmetrize(Gc.real());
    return is_hurwitz(S - R * G);
}

// Bass: with c above the spectral abscissa, (S + cI) X + X (S + cI)^T = 2R gives G = X^-1 stabilizing.
bool bass_seed(const Mat& S, const Mat& R, Mat& G) {
    const Eigen::Index p = S.rows();
    const double c = std::max(0.0, spectral_abscissa(S)) + 1.0;
    const Mat shifted = -(S + c * Mat::Identity(p, p)).transpose();
    const Mat X = lyapunov_kronecker(shifted, 2.0 * R);
    Eigen::FullPivLU<Mat> lu(X);
    if (!lu.isInvertible()) return false;
    G = symmetrize(lu.inverse());
    return is_hurwitz(S - R * G);
}

}  // namespace

SymmetricPD solve_riccati(const Mat& S, const Mat& B, double lambda_star, double epsilon,
                          const RiccatiOptions& options) {
    require_square(S, "S");
    if (B.rows() != S.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "Riccati B rows must match S");
    }
    if (!(lambda_star > 0.0) || !(epsilon > 0.0)) {
        throw Error(ErrorKind::SynthesisInfeasible, "Riccati requires lambda* > 0 and epsilon > 0");
    }
    if (!is_stabilizable(S, B)) {
        throw Error(ErrorKind::SynthesisInfeasible, "(S, B) is not stabilizable");
    }
    const Eigen::Index p = S.rows();
    const Mat R = lambda_star * B * B.transpose();
    const Mat epsI = epsilon * Mat::Identity(p, p);

    Mat G;
    if (!hamiltonian_seed(S, R, epsilon, G) && !bass_seed(S, R, G)) {
        throw Error(ErrorKind::ConvergenceFailure, "no stabilizing initial Riccati iterate found");
    }

    // Kleinman-Newton refinement: (S - R G_k)^T G_{k+1} + G_{k+1} (S - R G_k) = -(eps I + G_k R G_k)
    std::vector<double> log;
    double residual = riccati_residual(G, S, B, lambda_star, epsilon);
    log.push_back(residual);
    for (int it = 0; it < options.max_iterations && residual > 1e-3 * options.tolerance; ++it) {
        const Mat Acl = S - R * G;
        if (!is_hurwitz(Acl)) break;
        const Mat next = lyapunov_kronecker(Acl, epsI + G * R * G);
        const double next_residual = riccati_residual(next, S, B, lambda_star, epsilon);
        log.push_back(next_residual);
        const double change = (next - G).norm();
        G = next;
        residual = next_residual;
        if (change <= 1e-15 * (1.0 + G.norm())) break;
    }

    if (!(residual < options.tolerance) || !is_hurwitz(S - R * G)) {
        std::ostringstream os;
        os << "Riccati iteration did not converge; residual log:";
        for (double r : log) os << ' ' << r;
        throw Error(ErrorKind::ConvergenceFailure, os.str());
    }
    return SymmetricPD(G);
}

double condition_ratio(const SymmetricPD& P) noexcept { return P.eig_max() / P.eig_min(); }

CVec eigenvalues_general(const Mat& A) {
    require_square(A, "A");
    if (A.size() == 0) return CVec();
    Eigen::EigenSolver<Mat> es(A, false);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalConditioning, "eigenvalue iteration failed");
    }
    return es.eigenvalues();
}

CVec eigenvalues_2x2(const Mat& A) {
    if (A.rows() != 2 || A.cols() != 2) {
        throw Error(ErrorKind::DimensionMismatch, "eigenvalues_2x2 needs a 2x2 matrix");
    }
    const double half_trace = 0.5 * (A(0, 0) + A(1, 1));
    const double half_diff = 0.5 * (A(0, 0) - A(1, 1));
    const double disc = half_diff * half_diff + A(0, 1) * A(1, 0);
    CVec out(2);
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // avoid cancellation: compute the larger-magnitude root first, the other from the determinant
        const double big = half_trace >= 0.0 ? half_trace + root : half_trace - root;
        const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
        const double small = big != 0.0 ? det / big : half_trace - root;
        out(0) = std::max(big, small);
        out(1) = std::min(big, small);
    } else {
        const double root = std::sqrt(-disc);
        out(0) = {half_trace, root};
        out(1) = {half_trace, -root};
    }
    return out;
}

CVec eigenvalues(const Mat& A) {
    if (A.rows() == 2 && A.cols() == 2) return eigenvalues_2x2(A);
    return eigenvalues_general(A);
}

double spectral_abscissa(const Mat& A) {
    const CVec lambdas = eigenvalues(A);
    if (lambdas.size() == 0) return -std::numeric_limits<double>::infinity();
    return lambdas.real().maxCoeff();
}

bool is_hurwitz(const Mat& A) { return spectral_abscissa(A) < 0.0; }

double spectral_norm(const Mat& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(A);
    return svd.singularValues()(0);
}

}  // namespace fmsync
