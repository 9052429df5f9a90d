#include "bellopt/eigen_kit.hpp"

namespace bellopt {

namespace {

// Number of eigenvalues of the tridiagonal matrix strictly below x
// (Sturm sequence on the LDL^T pivots).
int count_below(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double x) {
    const Eigen::Index n = diag.size();
    int count = 0;
    double d = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double off2 = (i > 0) ? sub(i - 1) * sub(i - 1) : 0.0;
        d = diag(i) - x - (i > 0 ? off2 / d : 0.0);
        if (d == 0.0) d = -1e-300; // treat exact zero pivot as negative
        if (d < 0.0) ++count;
    }
    return count;
}

// Solves (T - shift I) x = b by Gaussian elimination with partial pivoting.
// The tridiagonal structure admits one extra superdiagonal fill-in.
Eigen::VectorXd solve_shifted(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                              double shift, Eigen::VectorXd b) {
    const Eigen::Index n = diag.size();
    Eigen::VectorXd d = diag.array() - shift; // main diagonal
    Eigen::VectorXd e(n), f(n);               // first and second superdiagonals
    Eigen::VectorXd l = sub;                  // subdiagonal (eliminated in place)
    for (Eigen::Index i = 0; i + 1 < n; ++i) e(i) = sub(i);
    e(n - 1) = 0.0;
    f.setZero();

    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (std::abs(l(i)) > std::abs(d(i))) {
            std::swap(d(i), l(i));
            const double tmp_e = e(i);
            e(i) = d(i + 1);
            d(i + 1) = tmp_e;
            f(i) = (i + 2 < n) ? e(i + 1) : 0.0;
            if (i + 2 < n) e(i + 1) = 0.0;
            std::swap(b(i), b(i + 1));
        }
        if (d(i) == 0.0) d(i) = 1e-300;
        const double m = l(i) / d(i);
        d(i + 1) -= m * e(i);
        if (i + 2 < n) e(i + 1) -= m * f(i);
        b(i + 1) -= m * b(i);
    }
    if (d(n - 1) == 0.0) d(n - 1) = 1e-300;

    Eigen::VectorXd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = b(i);
        if (i + 1 < n) s -= e(i) * x(i + 1);
        if (i + 2 < n) s -= f(i) * x(i + 2);
        x(i) = s / d(i);
    }
    return x;
}

Eigen::VectorXd apply_tridiag(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                              const Eigen::VectorXd& x) {
    const Eigen::Index n = diag.size();
    Eigen::VectorXd y = diag.array() * x.array();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        y(i) += sub(i) * x(i + 1);
        y(i + 1) += sub(i) * x(i);
    }
    return y;
}

} // namespace

std::pair<double, Eigen::VectorXd> largest_eigenpair_tridiagonal(
    const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
    const Eigen::VectorXd* warm_start) {
    const Eigen::Index n = diag.size();
    if (n < 1) throw std::invalid_argument("empty tridiagonal matrix");
    if (sub.size() != n - 1)
        throw std::invalid_argument("subdiagonal length must be n-1");
    if (!diag.allFinite() || !sub.allFinite())
        throw std::invalid_argument("non-finite entries");
    if (n == 1) return {diag(0), Eigen::VectorXd::Ones(1)};

    // Gershgorin bracket for the top eigenvalue.
    double lo = diag(0), hi = diag(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(sub(i - 1));
        if (i + 1 < n) r += std::abs(sub(i));
        lo = std::max(lo, diag(i) - r); // any point with all n eigenvalues below it
        hi = std::max(hi, diag(i) + r);
    }
    lo = std::min(lo, hi);
    lo = diag.minCoeff() - sub.cwiseAbs().sum(); // safe lower bound
    const double scale = std::max(std::abs(lo), std::abs(hi)) + 1.0;
    while (hi - lo > 1e-15 * scale) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(diag, sub, mid) < n)
            lo = mid;
        else
            hi = mid;
    }
    double value = 0.5 * (lo + hi);

    // Inverse iteration at a slightly interior shift.
    Eigen::VectorXd x;
    if (warm_start && warm_start->size() == n && warm_start->norm() > 0)
        x = *warm_start / warm_start->norm();
    else
        x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    const double shift = value + 1e-12 * scale;
    for (int iter = 0; iter < 50; ++iter) {
        Eigen::VectorXd y = solve_shifted(diag, sub, shift, x);
        const double norm = y.norm();
        if (!std::isfinite(norm) || norm == 0.0) {
            // pathological start; perturb and retry
            x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
            x(0) += 0.5;
            x.normalize();
            continue;
        }
        x = y / norm;
        const Eigen::VectorXd res = apply_tridiag(diag, sub, x) - value * x;
        if (res.norm() < 1e-13 * scale) break;
    }
    value = x.dot(apply_tridiag(diag, sub, x)); // Rayleigh quotient refinement
    return {value, x};
}

} // namespace bellopt
