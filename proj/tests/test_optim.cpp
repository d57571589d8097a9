#include <catch2/catch_amalgamated.hpp>

#include "addae/diagnostics.hpp"
#include "addae/optim.hpp"
#include "test_helpers.hpp"

using namespace addae;
using Catch::Matchers::WithinAbs;

namespace {

Objective quadratic(const Eigen::VectorXd& c) {
    return [c](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * (x - c);
        return (x - c).squaredNorm();
    };
}

Objective rosenbrock() {
    return [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        g.resize(2);
        g(0) = -2.0 * a - 400.0 * x(0) * b;
        g(1) = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
}

}  // namespace

TEST_CASE("check_gradient is near-exact on a quadratic") {
    const Eigen::VectorXd c = testutil::random_matrix(6, 1, 1).col(0);
    const Eigen::VectorXd x = testutil::random_matrix(6, 1, 2).col(0);
    CHECK(check_gradient(quadratic(c), x, 1e-6) <= 1e-9);
    CHECK_THROWS(check_gradient(quadratic(c), x, 0.0));
}

TEST_CASE("check_gradient catches a corrupted gradient") {
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
    Objective corrupted = [c](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * (x - c);
        g(2) *= 2.0;  // deliberate bug
        return (x - c).squaredNorm();
    };
    const Eigen::VectorXd x = testutil::random_matrix(4, 1, 3).col(0);
    CHECK(check_gradient(corrupted, x, 1e-6) > 1e-2);
}

TEST_CASE("minimize solves a convex quadratic from the origin") {
    for (int dim : {2, 5, 12}) {
        const Eigen::VectorXd c = testutil::random_matrix(dim, 1, 10 + dim, 3.0).col(0);
        OptimSettings st;
        st.grad_tol = 1e-9;  // probe algorithmic exactness, not the training default
        const OptimResult res = minimize(quadratic(c), Eigen::VectorXd::Zero(dim), st);
        CAPTURE(dim);
        CHECK((res.x - c).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(res.iterations <= dim + 5);
        CHECK(res.stop_reason == StopReason::GradTol);
    }
}

TEST_CASE("minimize reaches the Rosenbrock minimum") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    OptimSettings st;
    st.grad_tol = 1e-9;
    const OptimResult res = minimize(rosenbrock(), x0, st);
    CHECK_THAT(res.x(0), WithinAbs(1.0, 1e-6));
    CHECK_THAT(res.x(1), WithinAbs(1.0, 1e-6));
}

TEST_CASE("a stationary start returns immediately") {
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(3);
    OptimSettings st;
    const OptimResult res = minimize(quadratic(c), c, st);
    CHECK(res.iterations == 0);
    CHECK(res.stop_reason == StopReason::GradTol);
    CHECK(res.cost_history.size() == 1);
}

TEST_CASE("cost history is monotone nonincreasing") {
    // a few nonconvex but smooth objectives
    for (unsigned seed : {4u, 5u, 6u}) {
        const Eigen::MatrixXd A = testutil::random_matrix(6, 6, seed);
        Objective obj = [&A](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            const Eigen::VectorXd y = A * x;
            const double quart = x.array().pow(4).sum();
            g = 2.0 * A.transpose() * y + 4.0 * x.array().pow(3).matrix() - Eigen::VectorXd::Ones(6);
            return y.squaredNorm() + quart - x.sum();
        };
        OptimSettings st;
        const OptimResult res = minimize(obj, testutil::random_matrix(6, 1, seed + 50).col(0), st);
        for (std::size_t i = 1; i < res.cost_history.size(); ++i)
            CHECK(res.cost_history[i] <= res.cost_history[i - 1]);
    }
}

TEST_CASE("identical inputs give identical iterate histories") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    OptimSettings st;
    const OptimResult a = minimize(rosenbrock(), x0, st);
    const OptimResult b = minimize(rosenbrock(), x0, st);
    CHECK(a.cost_history == b.cost_history);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("line-search failure returns the best iterate instead of throwing") {
    // |x| has a kink at the optimum; the quoted gradient is wrong on one side,
    // so the search direction eventually cannot produce sufficient decrease
    Objective kinked = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(1);
        g(0) = x(0) >= 0.0 ? 1.0 : -1.0;
        return std::abs(x(0));
    };
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    OptimSettings st;
    st.max_iters = 50;
    const OptimResult res = minimize(kinked, x0, st);
    CHECK(res.cost <= 1.0);
    for (std::size_t i = 1; i < res.cost_history.size(); ++i) CHECK(res.cost_history[i] <= res.cost_history[i - 1]);
}

TEST_CASE("beta-free training can drive an exactly representable instance to zero") {
    // small-amplitude data is reconstructible through the near-linear regime
    // of tanh, so with no regularization the data term can reach ~0
    const Architecture arch = build_architecture(Family::OneHid, 2, 2);
    TrainConfig cfg;
    cfg.seed = 12;
    cfg.alpha = 0.0;
    const WeightStack ws = init_weights(arch, cfg);
    const Eigen::MatrixXd batch = testutil::random_matrix(2, 8, 13, 0.05);

    const Objective obj = detail::weight_objective(arch, batch, ws.W0, 0.0);
    OptimSettings st;
    st.max_iters = 5000;
    st.grad_tol = 1e-12;
    st.rel_cost_tol = 1e-16;
    const OptimResult res = minimize(obj, flatten(ws.W), st);
    CHECK(res.cost <= 1e-8);
}
