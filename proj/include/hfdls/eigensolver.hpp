#pragma once

#include <Eigen/Dense>

namespace hfdls {

struct SymmetricEigen {
    Eigen::VectorXd values;   // unsorted, matching the columns of `vectors`
    Eigen::MatrixXd vectors;  // orthonormal columns
    int sweeps = 0;
    double off_diagonal_norm = 0.0;  // Frobenius norm of the residual off-diagonal part
};

/// Cyclic Jacobi rotation eigensolver for small dense real symmetric matrices.
///
/// Sweeps over all (p, q) pairs, annihilating a_pq with a plane rotation, until the
/// off-diagonal Frobenius norm drops below `tolerance` times the matrix norm. Exact
/// zeros are never filled in, so block-diagonal input stays block-diagonal in the
/// eigenvectors. Throws NumericalError when `max_sweeps` is exhausted.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tolerance = 1e-14,
                            int max_sweeps = 64);

}  // namespace hfdls
