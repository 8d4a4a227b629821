#include "hfdls/eigensolver.hpp"

#include <cmath>
#include <string>

#include "hfdls/errors.hpp"

namespace hfdls {

namespace {

double off_norm(const Eigen::MatrixXd& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tolerance, int max_sweeps) {
    const Eigen::Index n = input.rows();
    if (n != input.cols()) throw NumericalError("jacobi_eigen: matrix is not square");
    if (!input.isApprox(input.transpose(), 1e-14) && n > 0) {
        const double asym = (input - input.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * std::max(1.0, input.cwiseAbs().maxCoeff()))
            throw NumericalError("jacobi_eigen: matrix is not symmetric");
    }

    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = a.norm();
    SymmetricEigen out;

    int sweep = 0;
    double off = off_norm(a);
    while (off > tolerance * scale && off > 0.0) {
        if (sweep == max_sweeps) {
            throw NumericalError("jacobi_eigen: no convergence after " + std::to_string(sweep) +
                                 " sweeps, off-diagonal norm " + std::to_string(off) +
                                 " vs matrix norm " + std::to_string(scale));
        }
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        ++sweep;
        off = off_norm(a);
    }

    out.values = a.diagonal();
    out.vectors = std::move(v);
    out.sweeps = sweep;
    out.off_diagonal_norm = off;
    return out;
}

}  // namespace hfdls
