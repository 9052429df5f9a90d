#include "bellopt/chain.hpp"

#include <cmath>
#include <stdexcept>

#include "bellopt/eigen_kit.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bellopt::chain {

namespace {

void check_params(const ChainParams& p) {
    if (p.n < 2) throw std::invalid_argument("chain: n must be >= 2");
    if (!p.even() && p.n < 3)
        throw std::invalid_argument("chain: odd layout needs n >= 3");
    if (p.c.size() != p.n + 1)
        throw std::invalid_argument("chain: c must have n+1 entries");
    if (p.c(0) != 1.0) throw std::invalid_argument("chain: c_0 must be 1");
    if (p.c(p.n) != branch_value(p.branch))
        throw std::invalid_argument("chain: c_n inconsistent with branch");
    for (int i = 0; i <= p.n; ++i)
        if (!(std::abs(p.c(i)) <= 1.0))
            throw std::invalid_argument("chain: c_i out of [-1, 1]");
    if (p.lambda.size() != p.n)
        throw std::invalid_argument("chain: lambda must have n entries");
}

// 2x2 projector block [[(1-c)/2, s/2], [s/2, (1+c)/2]] with s = sqrt(1-c^2),
// written at rows/cols (k, k+1); sign < 0 negates the off-diagonal.
void put_c_block(Eigen::MatrixXd& M, int k, double c, double sign, bool plus_first) {
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double lo = (1.0 - c) / 2.0, hi = (1.0 + c) / 2.0;
    M(k, k) = plus_first ? hi : lo;
    M(k + 1, k + 1) = plus_first ? lo : hi;
    M(k, k + 1) = M(k + 1, k) = sign * s / 2.0;
}

void put_half_block(Eigen::MatrixXd& M, int k) {
    M(k, k) = M(k, k + 1) = M(k + 1, k) = M(k + 1, k + 1) = 0.5;
}

} // namespace

Operators build_operators(const ChainParams& params) {
    check_params(params);
    const int n = params.n;
    const auto& c = params.c;
    Operators ops;
    for (auto& M : ops.A) M = Eigen::MatrixXd::Zero(n, n);
    for (auto& M : ops.B) M = Eigen::MatrixXd::Zero(n, n);
    auto& [A1, A2, A3] = ops.A;
    auto& [B1, B2, B3] = ops.B;

    // A-aligned 2x2 blocks sit at (i, i+1) for even i, B-aligned ones at odd
    // i (1-based). For odd n the A side has a leading 1x1 block and the B
    // side a trailing one; for even n the A side has both 1x1 end blocks.
    A1(0, 0) = A2(0, 0) = 1.0;
    B3(0, 0) = 1.0;
    const int a_block_last = params.even() ? n - 2 : n - 1;
    for (int i = 2; i <= a_block_last; i += 2) {
        const int k = i - 1; // 0-based row of the block
        put_c_block(A2, k, c(i), +1.0, false);
        put_c_block(A1, k, c(i), -1.0, false);
        put_half_block(B3, k);
    }
    const int b_block_last = params.even() ? n - 1 : n - 2;
    for (int i = 1; i <= b_block_last; i += 2) {
        const int k = i - 1;
        put_c_block(B2, k, c(i), +1.0, true);
        put_c_block(B1, k, c(i), -1.0, true);
        put_half_block(A3, k);
    }
    if (params.even()) {
        // trailing 1x1 A-side blocks; their values follow from the signs of
        // the corresponding diagonal entries of the optimality matrices
        A2(n - 1, n - 1) = 1.0;
        A1(n - 1, n - 1) = -c(n);
        B3(n - 1, n - 1) = 1.0;
    } else {
        B2(n - 1, n - 1) = 1.0 + c(n);
        B1(n - 1, n - 1) = 0.0;
        A3(n - 1, n - 1) = 1.0;
    }
    return ops;
}

double update_c(int i, const Eigen::VectorXd& c, const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(c.size()) - 1;
    if (i < 1 || i > n - 1) throw std::invalid_argument("update_c: index out of range");
    const double li = lambda(i - 1);   // lambda_i
    const double lj = lambda(i);       // lambda_{i+1}
    const double tau = (1.0 + 2.0 * c(i + 1)) * lj * lj - (1.0 - 2.0 * c(i - 1)) * li * li;
    const double denom2 = tau * tau + 4.0 * li * li * lj * lj;
    if (denom2 == 0.0) return 0.0; // objective identically zero, any c_i optimal
    return tau / std::sqrt(denom2);
}

void build_tridiagonal(const Eigen::VectorXd& c, Eigen::VectorXd& diag,
                       Eigen::VectorXd& sub) {
    const int n = static_cast<int>(c.size()) - 1;
    diag.resize(n);
    sub.resize(n - 1);
    for (int i = 1; i <= n; ++i) {
        diag(i - 1) = c(i - 1) * c(i) + (c(i - 1) - c(i)) / 2.0 - 1.0;
        if (i == n) diag(i - 1) += (c(n) + 1.0) / 2.0;
    }
    for (int i = 1; i <= n - 1; ++i)
        sub(i - 1) = std::sqrt(std::max(0.0, 1.0 - c(i) * c(i))) / 2.0;
}

namespace {

int find_sign_change(const Eigen::VectorXd& c) {
    const int n = static_cast<int>(c.size()) - 1;
    for (int i = 1; i <= n - 1; ++i)
        if (c(i) < 0.0) return i;
    return 0;
}

} // namespace

ChainResult run_chain(int n, Branch branch, const ChainOptions& options) {
    if (n < 2) throw std::invalid_argument("run_chain: n must be >= 2");
    ChainResult result;
    result.params.n = n;
    result.params.branch = branch;

    Eigen::VectorXd c(n + 1);
    c(0) = 1.0;
    c(n) = branch_value(branch);
    if (options.init_c) {
        if (options.init_c->size() != n - 1)
            throw std::invalid_argument("run_chain: init_c must have n-1 entries");
        c.segment(1, n - 1) = *options.init_c;
    } else {
        const double C = options.init_magnitude;
        // +C up to the split, -C beyond it for the minus_one family; the
        // zero family has a single plateau
        const int split = options.split.value_or(n / 2);
        for (int i = 1; i <= n - 1; ++i)
            c(i) = (branch == Branch::zero || i <= split) ? C : -C;
    }
    if (options.pin_zero) {
        const int p = *options.pin_zero;
        if (p < 1 || p > n - 1)
            throw std::invalid_argument("run_chain: pin_zero index out of range");
        c(p) = 0.0;
    }

    Eigen::VectorXd diag, sub, lambda;
    double value = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int cycles = 0;

    auto state_step = [&]() {
        build_tridiagonal(c, diag, sub);
        auto [val, vec] =
            n > 200 ? largest_eigenpair_tridiagonal(diag, sub,
                                                    lambda.size() ? &lambda : nullptr)
                    : largest_eigenpair<double>(
                          [&] {
                              Eigen::MatrixXd M = diag.asDiagonal();
                              for (int i = 0; i + 1 < n; ++i)
                                  M(i, i + 1) = M(i + 1, i) = sub(i);
                              return M;
                          }());
        if (vec.sum() < 0.0) vec = -vec; // global sign canonicalization
        lambda = std::move(vec);
        return val;
    };

    for (int cycle = 0; cycle < options.max_cycles; ++cycle) {
        const double new_value = state_step();
        result.value_history.push_back(new_value);
        cycles = cycle + 1;
        if (cycle > 0 && new_value - value < options.tol) {
            value = new_value;
            converged = true;
            break;
        }
        value = new_value;
        for (int i = 1; i <= n - 1; ++i) {
            if (options.pin_zero && *options.pin_zero == i) continue;
            c(i) = update_c(i, c, lambda);
        }
    }
    if (!converged) value = state_step(); // resync lambda with the final c

    result.value = value;
    result.params.c = std::move(c);
    result.params.lambda = std::move(lambda);
    result.iterations = cycles;
    result.converged = converged;
    result.sign_change_index = find_sign_change(result.params.c);
    return result;
}

std::vector<SweepRow> sweep(const std::vector<int>& ns, const std::vector<Branch>& branches,
                            const ChainOptions& options, int jobs) {
    if (ns.empty() || branches.empty())
        throw std::invalid_argument("sweep: empty range");
    struct Cell {
        int n;
        Branch branch;
    };
    std::vector<Cell> cells;
    for (int n : ns)
        for (Branch b : branches) cells.push_back({n, b});

    std::vector<SweepRow> rows(cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto res = run_chain(cells[k].n, cells[k].branch, options);
        rows[k] = {cells[k].n,
                   cells[k].branch,
                   res.value,
                   kI3322UpperBound - res.value,
                   res.iterations,
                   res.converged,
                   res.sign_change_index};
    }
    return rows;
}

OptimalityReport verify_optimality(const ChainParams& params) {
    check_params(params);
    const int n = params.n;
    const auto ops = build_operators(params);
    const auto& [A1, A2, A3] = ops.A;
    const auto& [B1, B2, B3] = ops.B;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd outer = params.lambda * params.lambda.transpose();

    // driving matrices of the six single-operator optimality conditions
    const std::array<std::pair<const Eigen::MatrixXd*, Eigen::MatrixXd>, 6> conditions = {{
        {&A1, B1 + B2 - B3},
        {&A2, B1 + B2 + B3 - id},
        {&A3, B2 - B1},
        {&B1, A1 + A2 - A3 - id},
        {&B2, A1 + A2 + A3 - 2.0 * id},
        {&B3, A2 - A1},
    }};

    OptimalityReport report;
    for (std::size_t k = 0; k < conditions.size(); ++k) {
        const Eigen::MatrixXd X = conditions[k].second.cwiseProduct(outer);
        const Eigen::MatrixXd P = positive_spectral_projector<double>(X);
        const double gain =
            (P - *conditions[k].first).cwiseProduct(X).sum();
        report.gains[k] = gain;
        report.max_gain = std::max(report.max_gain, gain);
    }
    report.c1_positive = params.c(1) > 0.0;
    report.branch_consistent = params.branch == Branch::minus_one
                                   ? params.c(n - 1) <= 0.0
                                   : params.c(n - 1) >= 0.0;
    report.min_lambda = params.lambda.minCoeff();
    return report;
}

} // namespace bellopt::chain
