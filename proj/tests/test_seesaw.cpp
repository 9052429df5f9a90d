#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "bellopt/seesaw.hpp"

using namespace bellopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kChshMax = 0.20710678118654752; // 1/sqrt(2) - 1/2

BellExpression random_expression(Rng& rng, int max_settings) {
    const int ma = 1 + static_cast<int>(rng.uniform_index(max_settings));
    const int mb = 1 + static_cast<int>(rng.uniform_index(max_settings));
    BellExpression e(ma, mb);
    for (int mu = 0; mu <= ma; ++mu)
        for (int nu = 0; nu <= mb; ++nu) e.entry(mu, nu) = 2.0 * rng.uniform() - 1.0;
    return e;
}

bool is_projector(const MatrixXd& P) {
    return (P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12 &&
           (P * P - P).cwiseAbs().maxCoeff() < 1e-10;
}

} // namespace

TEST_CASE("build_X hand cases") {
    SUBCASE("zero Bob operators, no marginal term") {
        BellExpression e(1, 1);
        e.entry(1, 1) = 3.0;
        const VectorXd state = Eigen::Vector2d(1, 0);
        const MatrixXd X = build_X<double>(e, {MatrixXd::Zero(2, 2)}, state, 1);
        CHECK(X.isZero(0.0));
    }
    SUBCASE("identity term only gives diag(lambda^2)") {
        BellExpression e(1, 1);
        e.entry(1, 0) = 1.0;
        const VectorXd state = Eigen::Vector2d(0.6, 0.8);
        const MatrixXd X = build_X<double>(e, {MatrixXd::Zero(2, 2)}, state, 1);
        CHECK(X(0, 0) == doctest::Approx(0.36));
        CHECK(X(1, 1) == doctest::Approx(0.64));
        CHECK(std::abs(X(0, 1)) < 1e-15);
    }
    SUBCASE("CHSH mu=2 with diagonal Bob operators") {
        const auto e = builtin_chsh();
        MatrixXd B = MatrixXd::Zero(2, 2);
        B(0, 0) = 1.0;
        const VectorXd state = Eigen::Vector2d(1, 0);
        const MatrixXd X = build_X<double>(e, {B, B}, state, 2);
        // entry (1,1): M_21 + M_22 = 1 - 1 = 0
        CHECK(X.cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("bad setting index") {
        const auto e = builtin_chsh();
        const VectorXd state = Eigen::Vector2d(1, 0);
        CHECK_THROWS(build_X<double>(e, {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)},
                                     state, 0));
    }
}

TEST_CASE("step_alice on zero X gives zero projectors") {
    BellExpression e(2, 1);
    const VectorXd state = Eigen::Vector2d(1, 0);
    const auto A = step_alice<double>(e, {MatrixXd::Zero(2, 2)}, state);
    REQUIRE(A.size() == 2);
    CHECK(A[0].isZero(0.0));
    CHECK(A[1].isZero(0.0));
}

TEST_CASE("step_alice reproduces the CHSH maximum from the optimal partner") {
    SeesawConfig cfg;
    cfg.dim = 2;
    cfg.restarts = 20;
    cfg.seed = 1;
    const auto e = builtin_chsh();
    const auto best = run_seesaw<double>(e, cfg);
    REQUIRE(best.value == doctest::Approx(kChshMax).epsilon(1e-8));
    const auto A = step_alice<double>(e, best.B_ops, best.state);
    CHECK(evaluate_quantum_value<double>(e, A, best.B_ops, best.state) ==
          doctest::Approx(kChshMax).epsilon(1e-9));
}

TEST_CASE("step_bob mirrors step_alice on symmetric instances") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        BellExpression e(3, 3);
        for (int mu = 0; mu <= 3; ++mu)
            for (int nu = mu; nu <= 3; ++nu)
                e.entry(mu, nu) = e.entry(nu, mu) = 2.0 * rng.uniform() - 1.0;
        std::vector<MatrixXd> ops;
        for (int k = 0; k < 3; ++k) {
            Rng prng(split_seed(300 + trial, k));
            ops.push_back(random_projector<double>(4, prng));
        }
        VectorXd state = random_state(4, rng);
        const auto from_alice = step_alice<double>(e, ops, state);
        const auto from_bob = step_bob<double>(e, ops, state);
        for (int k = 0; k < 3; ++k)
            CHECK((from_alice[k] - from_bob[k]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("each step never decreases the value") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const auto e = random_expression(rng, 4);
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(4));
        std::vector<MatrixXd> A, B;
        for (int mu = 0; mu < e.m_A; ++mu) {
            Rng prng(split_seed(500 + trial, mu));
            A.push_back(random_projector<double>(n, prng));
        }
        for (int nu = 0; nu < e.m_B; ++nu) {
            Rng prng(split_seed(700 + trial, nu));
            B.push_back(random_projector<double>(n, prng));
        }
        VectorXd state = random_state(n, rng);

        double value = evaluate_quantum_value<double>(e, A, B, state);
        A = step_alice<double>(e, B, state);
        double after = evaluate_quantum_value<double>(e, A, B, state);
        CHECK(after >= value - 1e-12);
        value = after;
        B = step_bob<double>(e, A, state);
        after = evaluate_quantum_value<double>(e, A, B, state);
        CHECK(after >= value - 1e-12);
        value = after;
        const auto [sv, new_state] = step_state<double>(e, A, B);
        CHECK(sv >= value - 1e-12);
        CHECK(evaluate_quantum_value<double>(e, A, B, new_state) ==
              doctest::Approx(sv).epsilon(1e-12));
    }
}

TEST_CASE("step_state hand cases") {
    SUBCASE("single supported axis") {
        BellExpression e(1, 1);
        e.entry(1, 1) = 1.0;
        MatrixXd P = MatrixXd::Zero(2, 2);
        P(0, 0) = 1.0;
        const auto [value, state] = step_state<double>(e, {P}, {P});
        CHECK(value == doctest::Approx(1.0));
        CHECK(std::abs(state(0)) == doctest::Approx(1.0));
    }
    SUBCASE("constant expression") {
        BellExpression e(1, 1);
        e.entry(0, 0) = -0.75;
        MatrixXd P = MatrixXd::Zero(3, 3);
        const auto [value, state] = step_state<double>(e, {P}, {P});
        CHECK(value == doctest::Approx(-0.75));
        CHECK(state.norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("run_seesaw hits the CHSH quantum maximum at n=2") {
    SeesawConfig cfg;
    cfg.dim = 2;
    cfg.restarts = 20;
    cfg.seed = 1;
    const auto result = run_seesaw<double>(builtin_chsh(), cfg);
    CHECK(result.value == doctest::Approx(kChshMax).epsilon(1e-8));
    for (const auto& P : result.A_ops) CHECK(is_projector(P));
    for (const auto& P : result.B_ops) CHECK(is_projector(P));
    CHECK(evaluate_quantum_value<double>(builtin_chsh(), result.A_ops, result.B_ops,
                                         result.state) ==
          doctest::Approx(result.value).epsilon(1e-12));
}

TEST_CASE("run_seesaw hits the I3322 qubit maximum at n=2") {
    SeesawConfig cfg;
    cfg.dim = 2;
    cfg.restarts = 50;
    cfg.seed = 1;
    const auto result = run_seesaw<double>(builtin_i3322(), cfg);
    CHECK(result.value == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("zero expression optimizes to exactly zero") {
    SeesawConfig cfg;
    cfg.dim = 3;
    cfg.restarts = 2;
    cfg.seed = 5;
    BellExpression zero(2, 2);
    const auto result = run_seesaw<double>(zero, cfg);
    CHECK(result.value == 0.0);
}

TEST_CASE("identical configs give bit-identical histories") {
    SeesawConfig cfg;
    cfg.dim = 3;
    cfg.restarts = 6;
    cfg.seed = 1234;
    const auto r1 = run_seesaw<double>(builtin_i3322(), cfg);
    const auto r2 = run_seesaw<double>(builtin_i3322(), cfg);
    CHECK(r1.value == r2.value);
    CHECK(r1.restart_index == r2.restart_index);
    CHECK(r1.value_history == r2.value_history);
}

TEST_CASE("parallel restarts reproduce the serial result") {
    SeesawConfig cfg;
    cfg.dim = 3;
    cfg.restarts = 12;
    cfg.seed = 77;
    cfg.jobs = 1;
    const auto serial = run_seesaw<double>(builtin_i3322(), cfg);
    cfg.jobs = 4;
    const auto parallel = run_seesaw<double>(builtin_i3322(), cfg);
    CHECK(serial.value == parallel.value);
    CHECK(serial.restart_index == parallel.restart_index);
    CHECK(serial.value_history == parallel.value_history);
}

TEST_CASE("value history is nondecreasing") {
    SeesawConfig cfg;
    cfg.dim = 4;
    cfg.restarts = 5;
    cfg.seed = 9;
    const auto result = run_seesaw<double>(builtin_i3322(), cfg);
    for (std::size_t k = 1; k < result.value_history.size(); ++k)
        CHECK(result.value_history[k] >= result.value_history[k - 1] - 1e-12);
}

TEST_CASE("dimension monotonicity on CHSH") {
    SeesawConfig cfg;
    cfg.restarts = 20;
    cfg.seed = 3;
    double prev = -1.0;
    for (int n = 2; n <= 5; ++n) {
        cfg.dim = n;
        const auto r = run_seesaw<double>(builtin_chsh(), cfg);
        CHECK(r.value >= prev - 1e-9);
        prev = r.value;
    }
}

TEST_CASE("I3322 see-saw values respect the level-four upper bound") {
    SeesawConfig cfg;
    cfg.restarts = 10;
    cfg.seed = 21;
    for (int n : {2, 3, 4}) {
        cfg.dim = n;
        const auto r = run_seesaw<double>(builtin_i3322(), cfg);
        CHECK(r.value <= 0.250875385 + 1e-8);
    }
}

TEST_CASE("early stopping abandons runs after the grace period") {
    SeesawConfig cfg;
    cfg.dim = 6;
    cfg.restarts = 1;
    cfg.seed = 2;
    cfg.max_cycles = 1000;
    cfg.tol_value = 1e-16; // keep improvement above threshold artificially long
    EarlyStopRule rule;
    rule.threshold = 2.0; // every component counts as dead
    rule.count = 1;
    rule.grace_cycles = 3;
    cfg.early_stop = rule;
    const auto r = run_seesaw<double>(builtin_i3322(), cfg);
    CHECK(r.cycles_used <= 4);
}

TEST_CASE("stationarity residual") {
    SeesawConfig cfg;
    cfg.dim = 2;
    cfg.restarts = 20;
    cfg.seed = 1;
    const auto e = builtin_chsh();
    const auto best = run_seesaw<double>(e, cfg);

    SUBCASE("converged solution is a fixed point") {
        CHECK(stationarity_residual<double>(e, best.A_ops, best.B_ops, best.state) <
              1e-9);
    }
    SUBCASE("perturbing the state breaks stationarity") {
        VectorXd state = best.state;
        const double angle = 0.1;
        const Eigen::Rotation2D<double> rot(angle);
        state = rot.toRotationMatrix() * state;
        CHECK(stationarity_residual<double>(e, best.A_ops, best.B_ops, state) > 1e-4);
    }
    SUBCASE("all-zero solution of the zero expression") {
        BellExpression zero(1, 1);
        std::vector<MatrixXd> ops = {MatrixXd::Zero(2, 2)};
        const VectorXd state = Eigen::Vector2d(1, 0);
        CHECK(stationarity_residual<double>(zero, ops, ops, state) == 0.0);
    }
}

TEST_CASE("complex mode reaches the CHSH maximum and stays monotone") {
    using C = std::complex<double>;
    SeesawConfig cfg;
    cfg.dim = 2;
    cfg.restarts = 10;
    cfg.seed = 4;
    const auto r = run_seesaw<C>(builtin_chsh(), cfg);
    CHECK(r.value == doctest::Approx(kChshMax).epsilon(1e-8));
    for (std::size_t k = 1; k < r.value_history.size(); ++k)
        CHECK(r.value_history[k] >= r.value_history[k - 1] - 1e-12);
    for (const auto& P : r.A_ops) {
        CHECK((P - P.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
    }
}
