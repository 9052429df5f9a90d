#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

namespace bellopt::chain {

// Conjectured infinite-dimensional I3322 maximum (12 significant digits).
inline constexpr double kI3322Limit = 0.250875384514;
// Reference upper bound used for the distance column of sweeps.
inline constexpr double kI3322UpperBound = 0.250875385;

// Value of the last chain parameter c_n, selecting one of the two solution
// families. The zero branch is better for small n; minus_one overtakes it
// above n = 79 and converges to the limit value.
enum class Branch { zero, minus_one };

inline double branch_value(Branch b) { return b == Branch::zero ? 0.0 : -1.0; }

struct ChainParams {
    int n = 0;      // local dimension
    Branch branch = Branch::zero;
    Eigen::VectorXd c;      // c_0..c_n (size n+1), c_0 = 1, c_n fixed by branch
    Eigen::VectorXd lambda; // Schmidt coefficients, size n, unit norm

    bool even() const { return n % 2 == 0; }
};

struct Operators {
    std::array<Eigen::MatrixXd, 3> A;
    std::array<Eigen::MatrixXd, 3> B;
};

struct ChainResult {
    double value = 0.0;
    ChainParams params;
    int iterations = 0;
    bool converged = false;
    int sign_change_index = 0; // first i with c_i < 0, or 0 when none
    std::vector<double> value_history; // per-cycle top eigenvalues
};

struct ChainOptions {
    double tol = 1e-13;
    int max_cycles = 50000;
    double init_magnitude = 0.9;              // the +-C initialization constant
    std::optional<Eigen::VectorXd> init_c;    // interior c_1..c_{n-1}
    std::optional<int> split;                 // last index initialized to +C
    std::optional<int> pin_zero;              // force c_i = 0 at this index
};

struct OptimalityReport {
    std::array<double, 6> gains{}; // A1, A2, A3, B1, B2, B3 replacement gains
    double max_gain = 0.0;
    bool c1_positive = false;
    bool branch_consistent = false; // sign of c_{n-1} matches the branch
    double min_lambda = 0.0;

    bool passed(double gain_tol = 1e-9) const {
        return max_gain < gain_tol && c1_positive && branch_consistent &&
               min_lambda > 1e-14;
    }
};

// Block-diagonal I3322 measurement operators for the given parameters.
Operators build_operators(const ChainParams& params);

// Closed-form maximizer of the single-parameter block objective,
// c_i = tau_i / sqrt(tau_i^2 + 4 lambda_i^2 lambda_{i+1}^2). Index i is
// 1-based (1 <= i <= n-1); c holds c_0..c_n and lambda the n coefficients.
double update_c(int i, const Eigen::VectorXd& c, const Eigen::VectorXd& lambda);

// Symmetric tridiagonal state matrix: diagonal c_{i-1} c_i + (c_{i-1}-c_i)/2
// - 1 + (c_n+1)/2 at i = n, off-diagonal s_i / 2.
void build_tridiagonal(const Eigen::VectorXd& c, Eigen::VectorXd& diag,
                       Eigen::VectorXd& sub);

// Alternates the state eigenproblem with in-place c sweeps, starting from the
// state step, until the value improvement drops below tol.
ChainResult run_chain(int n, Branch branch, const ChainOptions& options = {});

struct SweepRow {
    int n = 0;
    Branch branch = Branch::zero;
    double value = 0.0;
    double distance = 0.0; // kI3322UpperBound - value
    int iterations = 0;
    bool converged = false;
    int sign_change_index = 0;
};

// One row per (n, branch) cell; cells may run concurrently (jobs > 1) and the
// row order is deterministic either way.
std::vector<SweepRow> sweep(const std::vector<int>& ns, const std::vector<Branch>& branches,
                            const ChainOptions& options = {}, int jobs = 1);

// Rebuilds the six single-step optimality checks and the end-block sign
// conditions for a converged solution.
OptimalityReport verify_optimality(const ChainParams& params);

} // namespace bellopt::chain
