#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bellopt/rng.hpp"

namespace bellopt {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
struct EigenDecomposition {
    Eigen::VectorXd values; // ascending
    Mat<Scalar> vectors;    // orthonormal columns
};

// Full eigendecomposition of a Hermitian (symmetric in real mode) matrix.
// The input is symmetrized as (H + H*)/2 before factorization.
template <class Scalar>
EigenDecomposition<Scalar> eigh(const Mat<Scalar>& H) {
    if (!H.allFinite()) throw std::invalid_argument("eigh: non-finite entries");
    if (H.rows() != H.cols()) throw std::invalid_argument("eigh: matrix not square");
    const Mat<Scalar> sym = (H + H.adjoint()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(sym);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigh: eigensolver failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// Projector onto the span of eigenvectors of X with eigenvalue above
// eps = 1e-12 * (1 + max|X|). Maximizes trace(P X) over projectors P;
// zero eigenvalues are excluded, giving the minimal-rank optimizer.
template <class Scalar>
Mat<Scalar> positive_spectral_projector(const Mat<Scalar>& X) {
    const auto d = eigh(X);
    const double eps = 1e-12 * (1.0 + X.cwiseAbs().maxCoeff());
    const Eigen::Index n = X.rows();
    Mat<Scalar> P = Mat<Scalar>::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        if (d.values(k) > eps)
            P.noalias() += d.vectors.col(k) * d.vectors.col(k).adjoint();
    return P;
}

// Largest eigenvalue and a unit eigenvector, dense path.
template <class Scalar>
std::pair<double, Vec<Scalar>> largest_eigenpair(const Mat<Scalar>& M) {
    const auto d = eigh(M);
    const Eigen::Index top = M.rows() - 1;
    return {d.values(top), d.vectors.col(top)};
}

// Largest eigenpair of a symmetric tridiagonal matrix (diag of length n,
// sub of length n-1) via Sturm-sequence bisection plus inverse iteration.
// An optional warm-start vector speeds up repeated solves on nearby matrices.
std::pair<double, Eigen::VectorXd> largest_eigenpair_tridiagonal(
    const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
    const Eigen::VectorXd* warm_start = nullptr);

namespace detail {

// One Givens-style 2x2 conjugation on rows/columns (p,q). In complex mode a
// random phase accompanies the rotation angle.
template <class Scalar>
void apply_random_rotation(Mat<Scalar>& P, Eigen::Index p, Eigen::Index q, Rng& rng) {
    const double theta = 2.0 * M_PI * rng.uniform();
    Scalar c(std::cos(theta)), s(std::sin(theta));
    if constexpr (!std::is_floating_point_v<Scalar>) {
        const double phi = 2.0 * M_PI * rng.uniform();
        s *= Scalar(std::cos(phi), std::sin(phi));
    }
    // G = [[c, s], [-conj(s), conj(c)]] acting on (p,q); P <- G P G†
    using std::conj;
    const Vec<Scalar> row_p = P.row(p);
    const Vec<Scalar> row_q = P.row(q);
    P.row(p) = c * row_p.transpose() + s * row_q.transpose();
    if constexpr (std::is_floating_point_v<Scalar>)
        P.row(q) = -s * row_p.transpose() + c * row_q.transpose();
    else
        P.row(q) = -conj(s) * row_p.transpose() + conj(c) * row_q.transpose();
    const Vec<Scalar> col_p = P.col(p);
    const Vec<Scalar> col_q = P.col(q);
    if constexpr (std::is_floating_point_v<Scalar>) {
        P.col(p) = c * col_p + s * col_q;
        P.col(q) = -s * col_p + c * col_q;
    } else {
        P.col(p) = conj(c) * col_p + conj(s) * col_q;
        P.col(q) = -s * col_p + c * col_q;
    }
}

} // namespace detail

// Random projector: 0/1 diagonal with independent fair coin entries, then
// 5*n^2 random two-dimensional rotations on uniformly chosen index pairs.
template <class Scalar>
Mat<Scalar> random_projector(Eigen::Index n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("random_projector: n must be >= 1");
    Mat<Scalar> P = Mat<Scalar>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (rng.coin()) P(i, i) = Scalar(1);
    if (n == 1) return P;
    const Eigen::Index count = 5 * n * n;
    for (Eigen::Index k = 0; k < count; ++k) {
        const auto p = static_cast<Eigen::Index>(rng.uniform_index(n));
        auto q = static_cast<Eigen::Index>(rng.uniform_index(n - 1));
        if (q >= p) ++q;
        detail::apply_random_rotation(P, p, q, rng);
    }
    // rotations preserve Hermiticity only up to roundoff
    P = ((P + P.adjoint()) / Scalar(2)).eval();
    return P;
}

// Random state: strictly positive uniform entries, Euclidean-normalized.
inline Eigen::VectorXd random_state(Eigen::Index n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("random_state: n must be >= 1");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double x;
        do {
            x = rng.uniform();
        } while (x == 0.0);
        v(i) = x;
    }
    return v / v.norm();
}

} // namespace bellopt
