#pragma once

#include <string>
#include <vector>

#include "fmsync/types.hpp"

namespace fmsync {

/**
 * Symmetric positive definite matrix with cached extreme eigenvalues.
 *
 * Construction symmetrizes the input, checks definiteness with a Cholesky
 * factorization and throws `ErrorKind::NumericalConditioning` if it fails.
 */
class SymmetricPD {
  public:
    SymmetricPD() = default;
    explicit SymmetricPD(const Mat& matrix);

    [[nodiscard]] const Mat& matrix() const noexcept { return matrix_; }
    [[nodiscard]] double eig_min() const noexcept { return eig_min_; }
    [[nodiscard]] double eig_max() const noexcept { return eig_max_; }
    [[nodiscard]] Eigen::Index rows() const noexcept { return matrix_.rows(); }

  private:
    Mat matrix_;
    double eig_min_ = 0.0;
    double eig_max_ = 0.0;
};

struct LyapunovOptions {
    double tolerance = 1e-9;  // relative to 1 + ||R||_F
};

struct RiccatiOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
};

/// Solves P A + A^T P = -R by Kronecker vectorization.
[[nodiscard]] SymmetricPD solve_lyapunov(const Mat& A, const Mat& R, const LyapunovOptions& options = {});

/// Unchecked Kronecker solve of P A + A^T P = -R (no Hurwitz or definiteness checks).
[[nodiscard]] Mat lyapunov_kronecker(const Mat& A, const Mat& R);

/// Frobenius norm of P A + A^T P + R.
[[nodiscard]] double lyapunov_residual(const Mat& P, const Mat& A, const Mat& R);

/// Solves S^T G + G S - lambda* G B B^T G + eps I = 0 for the stabilizing G > 0.
[[nodiscard]] SymmetricPD solve_riccati(const Mat& S, const Mat& B, double lambda_star, double epsilon,
                                        const RiccatiOptions& options = {});

[[nodiscard]] double riccati_residual(const Mat& G, const Mat& S, const Mat& B, double lambda_star, double epsilon);

/// Returns true when (S, B) passes the PBH stabilizability test.
[[nodiscard]] bool is_stabilizable(const Mat& S, const Mat& B);

/// lambda_max(P) / lambda_min(P).
[[nodiscard]] double condition_ratio(const SymmetricPD& P) noexcept;

/// Eigenvalues of a general square matrix; 2x2 inputs use the closed form.
[[nodiscard]] CVec eigenvalues(const Mat& A);
[[nodiscard]] CVec eigenvalues_general(const Mat& A);
[[nodiscard]] CVec eigenvalues_2x2(const Mat& A);

/// max Re(lambda(A)); -inf for an empty matrix.
[[nodiscard]] double spectral_abscissa(const Mat& A);
[[nodiscard]] bool is_hurwitz(const Mat& A);

/// Largest singular value (induced 2-norm).
[[nodiscard]] double spectral_norm(const Mat& A);

[[nodiscard]] Mat kron(const Mat& a, const Mat& b);

}  // namespace fmsync
