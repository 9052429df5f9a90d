#pragma once

#include <Eigen/Dense>
#include <complex>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellopt {

// Two-outcome bipartite Bell functional with {0,1}-valued observables.
// coeffs is (m_A+1) x (m_B+1); index 0 on either side denotes the identity
// observable, so row/column 0 hold the marginal terms and entry (0,0) is a
// constant offset.
struct BellExpression {
    int m_A = 0;
    int m_B = 0;
    Eigen::MatrixXd coeffs;

    BellExpression() = default;
    BellExpression(int ma, int mb)
        : m_A(ma), m_B(mb), coeffs(Eigen::MatrixXd::Zero(ma + 1, mb + 1)) {}

    double& entry(int mu, int nu) { return coeffs(mu, nu); }
    double entry(int mu, int nu) const { return coeffs(mu, nu); }
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

// <A1B1>+<A1B2>+<A2B1>-<A2B2>-<A1>-<B1>, classical bound 0.
BellExpression builtin_chsh();

// The I3322 inequality, classical bound 0, qubit maximum 0.25.
BellExpression builtin_i3322();

// Text format: '#' comment lines; "m_A m_B" header; then (m_A+1) rows of
// (m_B+1) decimal coefficients.
BellExpression parse_bell_expression(std::istream& in);
BellExpression parse_bell_expression_file(const std::string& path);

// Emits shortest round-trip decimals; parse(serialize(e)) == e exactly.
std::string serialize(const BellExpression& expr);

// Exact maximum over deterministic local strategies (a_mu, b_nu in {0,1},
// a_0 = b_0 = 1). Throws std::length_error when m_A + m_B > 30.
double classical_bound(const BellExpression& expr);

namespace detail {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Entrywise aggregate W_ij = sum_{mu,nu} M_{mu,nu} A^mu_ij conj(B^nu_ij),
// with A^0 = B^0 = I. The Bell value is sum_ij W_ij lambda_i conj(lambda_j).
template <class Scalar>
Mat<Scalar> aggregate_matrix(const BellExpression& expr,
                             const std::vector<Mat<Scalar>>& A_ops,
                             const std::vector<Mat<Scalar>>& B_ops) {
    if (static_cast<int>(A_ops.size()) != expr.m_A ||
        static_cast<int>(B_ops.size()) != expr.m_B)
        throw std::invalid_argument("operator list length does not match setting count");
    const Eigen::Index n = A_ops.empty() ? (B_ops.empty() ? 1 : B_ops[0].rows())
                                         : A_ops[0].rows();
    for (const auto& P : A_ops)
        if (P.rows() != n || P.cols() != n)
            throw std::invalid_argument("dimension mismatch among Alice operators");
    for (const auto& P : B_ops)
        if (P.rows() != n || P.cols() != n)
            throw std::invalid_argument("dimension mismatch among Bob operators");

    const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
    auto aop = [&](int mu) -> const Mat<Scalar>& { return mu == 0 ? id : A_ops[mu - 1]; };
    auto bop = [&](int nu) -> const Mat<Scalar>& { return nu == 0 ? id : B_ops[nu - 1]; };

    Mat<Scalar> W = Mat<Scalar>::Zero(n, n);
    for (int mu = 0; mu <= expr.m_A; ++mu)
        for (int nu = 0; nu <= expr.m_B; ++nu) {
            const double m = expr.entry(mu, nu);
            if (m == 0.0) continue;
            W.array() += m * aop(mu).array() * bop(nu).array().conjugate();
        }
    return W;
}

} // namespace detail

// Bell value of a candidate solution in Schmidt-diagonal form,
// sum_{mu,nu,i,j} M_{mu,nu} A^mu_ij conj(B^nu_ij) lambda_i conj(lambda_j).
// In complex mode the imaginary part must vanish to 1e-10 and is discarded.
template <class Scalar>
double evaluate_quantum_value(const BellExpression& expr,
                              const std::vector<detail::Mat<Scalar>>& A_ops,
                              const std::vector<detail::Mat<Scalar>>& B_ops,
                              const detail::Vec<Scalar>& state) {
    const auto W = detail::aggregate_matrix<Scalar>(expr, A_ops, B_ops);
    if (state.size() != W.rows())
        throw std::invalid_argument("state dimension does not match operators");
    const Scalar raw = (state.array() * (W * state.conjugate()).array()).sum();
    const double im = std::abs(std::imag(std::complex<double>(raw)));
    if (im > 1e-10)
        throw std::runtime_error("Bell value has non-vanishing imaginary part");
    return std::real(std::complex<double>(raw));
}

} // namespace bellopt
