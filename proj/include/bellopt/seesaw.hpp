#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bellopt/bell_expression.hpp"
#include "bellopt/eigen_kit.hpp"

namespace bellopt {

struct EarlyStopRule {
    double threshold = 1e-4; // |lambda_i| below this counts as dead
    int count = 0;           // abandon when at least this many are dead (0 = ceil(n/4))
    int grace_cycles = 50;   // do not test before this many cycles
};

struct SeesawConfig {
    Eigen::Index dim = 2;
    double tol_value = 1e-12; // per-cycle improvement threshold
    int max_cycles = 10000;
    int restarts = 100;
    std::optional<EarlyStopRule> early_stop;
    std::uint64_t seed = 0;
    int jobs = 1; // restart-level parallelism; results are jobs-independent
};

template <class Scalar>
struct SeesawResult {
    double value = 0.0;
    std::vector<Mat<Scalar>> A_ops;
    std::vector<Mat<Scalar>> B_ops;
    Vec<Scalar> state;
    int cycles_used = 0;
    int restart_index = 0;
    bool converged = false;
    std::vector<double> value_history; // per-cycle values of the best run
};

// X-matrix of the Alice update for setting mu (1-based):
// X_ji = sum_nu M_{mu,nu} conj(B^nu_ij) lambda_i conj(lambda_j), so the
// mu-row contribution to the Bell value is Tr(A_mu X_mu).
template <class Scalar>
Mat<Scalar> build_X(const BellExpression& expr, const std::vector<Mat<Scalar>>& B_ops,
                    const Vec<Scalar>& state, int mu) {
    if (mu < 1 || mu > expr.m_A) throw std::invalid_argument("build_X: bad setting index");
    const Eigen::Index n = state.size();
    for (const auto& B : B_ops)
        if (B.rows() != n || B.cols() != n)
            throw std::invalid_argument("build_X: dimension mismatch");
    Mat<Scalar> T = Mat<Scalar>::Zero(n, n);
    const double m0 = expr.entry(mu, 0);
    if (m0 != 0.0) T += m0 * Mat<Scalar>::Identity(n, n);
    for (int nu = 1; nu <= expr.m_B; ++nu) {
        const double m = expr.entry(mu, nu);
        if (m != 0.0) T += m * B_ops[nu - 1].conjugate();
    }
    T.array() *= (state * state.adjoint()).array();
    Mat<Scalar> X = T.transpose();
    return ((X + X.adjoint()) / Scalar(2)).eval();
}

// Mirror of build_X with the parties swapped: Tr(B_nu Y_nu) is the nu-column
// contribution to the Bell value.
template <class Scalar>
Mat<Scalar> build_Y(const BellExpression& expr, const std::vector<Mat<Scalar>>& A_ops,
                    const Vec<Scalar>& state, int nu) {
    if (nu < 1 || nu > expr.m_B) throw std::invalid_argument("build_Y: bad setting index");
    const Eigen::Index n = state.size();
    Mat<Scalar> U = Mat<Scalar>::Zero(n, n);
    const double m0 = expr.entry(0, nu);
    if (m0 != 0.0) U += m0 * Mat<Scalar>::Identity(n, n);
    for (int mu = 1; mu <= expr.m_A; ++mu) {
        const double m = expr.entry(mu, nu);
        if (m != 0.0) U += m * A_ops[mu - 1];
    }
    Mat<Scalar> T = U.conjugate();
    T.array() *= (state.conjugate() * state.transpose()).array();
    Mat<Scalar> Y = T.transpose();
    return ((Y + Y.adjoint()) / Scalar(2)).eval();
}

// Optimal Alice projectors for fixed Bob operators and state.
template <class Scalar>
std::vector<Mat<Scalar>> step_alice(const BellExpression& expr,
                                    const std::vector<Mat<Scalar>>& B_ops,
                                    const Vec<Scalar>& state) {
    std::vector<Mat<Scalar>> A_ops;
    A_ops.reserve(expr.m_A);
    for (int mu = 1; mu <= expr.m_A; ++mu)
        A_ops.push_back(positive_spectral_projector(build_X(expr, B_ops, state, mu)));
    return A_ops;
}

template <class Scalar>
std::vector<Mat<Scalar>> step_bob(const BellExpression& expr,
                                  const std::vector<Mat<Scalar>>& A_ops,
                                  const Vec<Scalar>& state) {
    std::vector<Mat<Scalar>> B_ops;
    B_ops.reserve(expr.m_B);
    for (int nu = 1; nu <= expr.m_B; ++nu)
        B_ops.push_back(positive_spectral_projector(build_Y(expr, A_ops, state, nu)));
    return B_ops;
}

// Optimal state for fixed operators; the returned value is the Bell value.
// Eigenvector components may be negative or complex and are kept as-is.
template <class Scalar>
std::pair<double, Vec<Scalar>> step_state(const BellExpression& expr,
                                          const std::vector<Mat<Scalar>>& A_ops,
                                          const std::vector<Mat<Scalar>>& B_ops) {
    const Mat<Scalar> W = detail::aggregate_matrix<Scalar>(expr, A_ops, B_ops);
    // value(lambda) = lambda^dagger W^T lambda; W^T is Hermitian since W is
    const Mat<Scalar> G = W.transpose();
    return largest_eigenpair(G);
}

// Maximum value gain over the three step types; < 1e-9 certifies a joint
// fixed point of the alternating optimization.
template <class Scalar>
double stationarity_residual(const BellExpression& expr,
                             const std::vector<Mat<Scalar>>& A_ops,
                             const std::vector<Mat<Scalar>>& B_ops,
                             const Vec<Scalar>& state) {
    const double base = evaluate_quantum_value(expr, A_ops, B_ops, state);
    const double after_a =
        evaluate_quantum_value(expr, step_alice(expr, B_ops, state), B_ops, state);
    const double after_b =
        evaluate_quantum_value(expr, A_ops, step_bob(expr, A_ops, state), state);
    const double after_s = step_state(expr, A_ops, B_ops).first;
    const double gain = std::max({after_a, after_b, after_s}) - base;
    return std::max(gain, 0.0);
}

namespace detail {

template <class Scalar>
struct RunOutcome {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<Mat<Scalar>> A_ops, B_ops;
    Vec<Scalar> state;
    int cycles = 0;
    bool converged = false;
    std::vector<double> history;
};

template <class Scalar>
Vec<Scalar> widen_state(const Eigen::VectorXd& v) {
    if constexpr (std::is_floating_point_v<Scalar>)
        return v;
    else
        return v.template cast<Scalar>();
}

template <class Scalar>
RunOutcome<Scalar> run_once(const BellExpression& expr, const SeesawConfig& cfg,
                            std::vector<Mat<Scalar>> B_ops, Vec<Scalar> state) {
    RunOutcome<Scalar> out;
    std::vector<Mat<Scalar>> A_ops;
    double prev = -std::numeric_limits<double>::infinity();
    int dead_limit = 0;
    if (cfg.early_stop) {
        dead_limit = cfg.early_stop->count > 0
                         ? cfg.early_stop->count
                         : static_cast<int>((cfg.dim + 3) / 4);
    }
    for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
        A_ops = step_alice(expr, B_ops, state);
        B_ops = step_bob(expr, A_ops, state);
        auto [value, new_state] = step_state(expr, A_ops, B_ops);
        state = std::move(new_state);
        out.history.push_back(value);
        out.cycles = cycle + 1;
        prev = value;
        if (cycle > 0 && value - out.history[cycle - 1] < cfg.tol_value) {
            out.converged = true;
            break;
        }
        if (cfg.early_stop && cycle + 1 >= cfg.early_stop->grace_cycles) {
            int dead = 0;
            for (Eigen::Index i = 0; i < state.size(); ++i)
                if (std::abs(state(i)) < cfg.early_stop->threshold) ++dead;
            if (dead >= dead_limit) break; // abandoned run, still compared
        }
    }
    out.value = prev;
    out.A_ops = std::move(A_ops);
    out.B_ops = std::move(B_ops);
    out.state = std::move(state);
    return out;
}

} // namespace detail

// Continues the see-saw from a given starting point (no restarts).
template <class Scalar>
SeesawResult<Scalar> seesaw_from(const BellExpression& expr, const SeesawConfig& cfg,
                                 std::vector<Mat<Scalar>> B_ops, Vec<Scalar> state) {
    auto run = detail::run_once<Scalar>(expr, cfg, std::move(B_ops), std::move(state));
    SeesawResult<Scalar> result;
    result.value = run.value;
    result.A_ops = std::move(run.A_ops);
    result.B_ops = std::move(run.B_ops);
    result.state = std::move(run.state);
    result.cycles_used = run.cycles;
    result.converged = run.converged;
    result.value_history = std::move(run.history);
    return result;
}

// Full algorithm with random restarts. Restart seeds derive from cfg.seed and
// the restart index, so parallel execution reproduces the serial result.
template <class Scalar>
SeesawResult<Scalar> run_seesaw(const BellExpression& expr, const SeesawConfig& cfg) {
    if (cfg.restarts < 1) throw std::invalid_argument("run_seesaw: restarts must be >= 1");
    if (cfg.tol_value <= 0) throw std::invalid_argument("run_seesaw: tol_value must be > 0");
    std::vector<detail::RunOutcome<Scalar>> outcomes(cfg.restarts);

#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs) if (cfg.jobs > 1)
    for (int r = 0; r < cfg.restarts; ++r) {
        Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        std::vector<Mat<Scalar>> B_ops;
        for (int nu = 0; nu < expr.m_B; ++nu)
            B_ops.push_back(random_projector<Scalar>(cfg.dim, rng));
        Vec<Scalar> state = detail::widen_state<Scalar>(random_state(cfg.dim, rng));
        outcomes[r] = detail::run_once<Scalar>(expr, cfg, std::move(B_ops), std::move(state));
    }

    // deterministic reduction: max by value, ties to the lowest restart index
    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (outcomes[r].value > outcomes[best].value) best = r;

    SeesawResult<Scalar> result;
    auto& run = outcomes[best];
    result.value = run.value;
    result.A_ops = std::move(run.A_ops);
    result.B_ops = std::move(run.B_ops);
    result.state = std::move(run.state);
    result.cycles_used = run.cycles;
    result.restart_index = best;
    result.converged = run.converged;
    result.value_history = std::move(run.history);
    return result;
}

} // namespace bellopt
