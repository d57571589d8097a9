#include <catch2/catch_amalgamated.hpp>

#include "addae/diagnostics.hpp"
#include "addae/network.hpp"
#include "addae/optim.hpp"
#include "test_helpers.hpp"

using namespace addae;
using Catch::Matchers::WithinAbs;

TEST_CASE("architecture layer patterns follow the family definitions") {
    const Architecture a7 = build_architecture(Family::SevenSym, 33, 10);
    CHECK(a7.encoder_sizes == std::vector<int>{33, 40, 30, 20, 10});
    CHECK(a7.tied);
    CHECK(a7.num_layers() == 8);
    CHECK(a7.layer_sizes() == std::vector<int>{33, 40, 30, 20, 10, 20, 30, 40, 33});

    const Architecture a3 = build_architecture(Family::ThreeSym, 13, 5);
    CHECK(a3.encoder_sizes == std::vector<int>{13, 10, 5});

    const Architecture a1s = build_architecture(Family::OneSym, 10, 5);
    CHECK(a1s.encoder_sizes == std::vector<int>{10, 5});
    CHECK(a1s.tied);
    CHECK(a1s.stored_matrices() == 1);

    const Architecture a1h = build_architecture(Family::OneHid, 10, 5);
    CHECK_FALSE(a1h.tied);
    CHECK(a1h.stored_matrices() == 2);

    // interior sizes may exceed n when m > n/2
    const Architecture wide = build_architecture(Family::FiveSym, 10, 7);
    CHECK(wide.encoder_sizes == std::vector<int>{10, 28, 14, 7});

    CHECK_THROWS(parse_family("2Sym"));
    CHECK(parse_family("7Sym") == Family::SevenSym);
}

TEST_CASE("init_weights is bounded, seeded and deterministic") {
    TrainConfig cfg;
    cfg.seed = 42;
    const Architecture arch = build_architecture(Family::ThreeSym, 9, 3);
    const WeightStack a = init_weights(arch, cfg);
    const WeightStack b = init_weights(arch, cfg);
    REQUIRE(a.W.size() == 2);
    for (std::size_t l = 0; l < a.W.size(); ++l) {
        CHECK(a.W[l].cwiseAbs().maxCoeff() <= 0.1);
        CHECK(a.W[l] == b.W[l]);   // bit-identical under the same seed
        CHECK(a.W[l] == a.W0[l]);  // anchor frozen at the initial values
    }
    cfg.seed = 43;
    const WeightStack c = init_weights(arch, cfg);
    CHECK(a.W[0] != c.W[0]);
}

TEST_CASE("beta uses the row count of the full network") {
    TrainConfig cfg;
    const Architecture sym = build_architecture(Family::OneSym, 10, 5);
    const WeightStack ws = init_weights(sym, cfg);
    // encoder rows 5 plus adjoint-decoder rows 10
    CHECK_THAT(ws.beta, WithinAbs(1e-6 / std::sqrt(15.0), 1e-20));

    const Architecture hid = build_architecture(Family::OneHid, 10, 5);
    CHECK_THAT(compute_beta(hid, cfg.alpha), WithinAbs(ws.beta, 1e-20));

    // doubling every layer size scales beta by exactly 1/sqrt(2)
    const Architecture sym2 = build_architecture(Family::OneSym, 20, 10);
    CHECK_THAT(compute_beta(sym2, cfg.alpha) * std::sqrt(2.0), WithinAbs(ws.beta, 1e-20));

    const Architecture deep = build_architecture(Family::SevenSym, 12, 2);
    const double expected_rows = (8 + 6 + 4 + 2) + (4 + 6 + 8 + 12);
    CHECK_THAT(compute_beta(deep, cfg.alpha), WithinAbs(1e-6 / std::sqrt(expected_rows), 1e-20));
}

TEST_CASE("tanh activation matches its closed form") {
    Eigen::MatrixXd x(1, 1);
    x << 0.5;
    CHECK_THAT(activate(x)(0, 0), WithinAbs(0.46211715726000974, 1e-12));
    x << 0.0;
    CHECK(activate(x)(0, 0) == 0.0);
}

TEST_CASE("forward pass basics") {
    SECTION("zero weights give identically zero output") {
        const Architecture arch = build_architecture(Family::FiveSym, 6, 2);
        TrainConfig cfg;
        WeightStack ws = init_weights(arch, cfg);
        for (auto& W : ws.W) W.setZero();
        const Eigen::MatrixXd batch = testutil::random_matrix(6, 11, 5);
        const ActivationTrace trace = forward(ws, arch, batch);
        CHECK(trace.output().cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("scalar 1Sym with unit weight computes tanh") {
        Architecture arch;
        arch.encoder_sizes = {1, 1};
        arch.tied = true;
        WeightStack ws;
        ws.W = {Eigen::MatrixXd::Constant(1, 1, 1.0)};
        ws.W0 = ws.W;
        Eigen::MatrixXd x(1, 1);
        x << 0.7;
        const ActivationTrace trace = forward(ws, arch, x);
        CHECK_THAT(trace.output()(0, 0), WithinAbs(std::tanh(0.7), 1e-12));
    }
    SECTION("hidden activations stay inside (-1, 1)") {
        const Architecture arch = build_architecture(Family::ThreeSym, 5, 2);
        TrainConfig cfg;
        cfg.seed = 9;
        const WeightStack ws = init_weights(arch, cfg);
        const Eigen::MatrixXd batch = testutil::random_matrix(5, 20, 6);
        const ActivationTrace trace = forward(ws, arch, batch);
        for (int l = 1; l < arch.num_layers(); ++l) {
            CHECK(trace.outputs[static_cast<std::size_t>(l)].cwiseAbs().maxCoeff() < 1.0);
        }
        CHECK(trace.outputs.front() == batch);
        CHECK(trace.preacts.size() == static_cast<std::size_t>(arch.num_layers() - 1));
    }
    SECTION("batch width mismatch throws") {
        const Architecture arch = build_architecture(Family::OneSym, 4, 2);
        TrainConfig cfg;
        const WeightStack ws = init_weights(arch, cfg);
        CHECK_THROWS(forward(ws, arch, Eigen::MatrixXd::Zero(5, 3)));
    }
}

TEST_CASE("cost of zero weights is the mean residual energy") {
    const Architecture arch = build_architecture(Family::OneSym, 4, 2);
    TrainConfig cfg;
    WeightStack ws = init_weights(arch, cfg);
    for (auto& W : ws.W) W.setZero();
    for (auto& W : ws.W0) W.setZero();
    const Eigen::MatrixXd batch = testutil::random_matrix(4, 9, 13);
    CHECK_THAT(cost(ws, arch, batch), WithinAbs(batch.squaredNorm() / (2.0 * 9.0), 1e-14));
}

TEST_CASE("cost is zero for a perfect reconstruction at the anchor") {
    const Architecture arch = build_architecture(Family::ThreeSym, 4, 2);
    TrainConfig cfg;
    cfg.seed = 3;
    const WeightStack ws = init_weights(arch, cfg);
    const Eigen::MatrixXd zero_batch = Eigen::MatrixXd::Zero(4, 6);
    // zero input reproduces itself exactly through the bias-free network
    CHECK(cost(ws, arch, zero_batch) == 0.0);
}

TEST_CASE("cost and gradient are invariant under observation duplication") {
    const Architecture arch = build_architecture(Family::ThreeSym, 5, 2);
    TrainConfig cfg;
    cfg.seed = 21;
    const WeightStack ws = init_weights(arch, cfg);
    const Eigen::MatrixXd batch = testutil::random_matrix(5, 7, 22);
    Eigen::MatrixXd doubled(5, 14);
    doubled << batch, batch;

    CHECK_THAT(cost(ws, arch, doubled), WithinAbs(cost(ws, arch, batch), 1e-14));
    const auto g1 = gradient(ws, arch, batch);
    const auto g2 = gradient(ws, arch, doubled);
    for (std::size_t l = 0; l < g1.size(); ++l) CHECK((g1[l] - g2[l]).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("analytic gradients match central finite differences for every family") {
    // the finite-difference oracle is the reference; step 1e-6, tolerance 1e-5
    struct Case {
        Family family;
        int n, m, N;
    };
    const Case cases[] = {
        {Family::OneHid, 6, 3, 11}, {Family::OneSym, 7, 2, 9},  {Family::ThreeSym, 5, 2, 8},
        {Family::FiveSym, 6, 2, 7}, {Family::SevenSym, 8, 2, 5}, {Family::OneSym, 3, 3, 6},  // m = n internally
    };
    int tag = 0;
    for (const Case& c : cases) {
        const double err = gradient_probe(c.family, c.n, c.m, c.N, 1000 + static_cast<std::uint64_t>(tag++));
        CAPTURE(family_tag(c.family), c.n, c.m, c.N);
        CHECK(err <= 1e-5);
    }
}

TEST_CASE("zero batch at the anchor is a stationary point") {
    const Architecture arch = build_architecture(Family::OneSym, 4, 2);
    TrainConfig cfg;
    WeightStack ws = init_weights(arch, cfg);
    for (auto& W : ws.W) W.setZero();
    for (auto& W : ws.W0) W.setZero();
    const auto grads = gradient(ws, arch, Eigen::MatrixXd::Zero(4, 5));
    for (const auto& g : grads) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tied gradient equals the sum of the untied blocks") {
    for (Family fam : {Family::OneSym, Family::ThreeSym, Family::FiveSym, Family::SevenSym}) {
        const double diff = tied_identity_probe(fam, 6, 2, 8, 31);
        CAPTURE(family_tag(fam));
        CHECK(diff <= 1e-12);
    }
}

TEST_CASE("flatten and unflatten round-trip") {
    const Architecture arch = build_architecture(Family::ThreeSym, 6, 2);
    TrainConfig cfg;
    cfg.seed = 77;
    const WeightStack ws = init_weights(arch, cfg);
    const Eigen::VectorXd v = flatten(ws.W);
    const auto back = unflatten(v, arch);
    REQUIRE(back.size() == ws.W.size());
    for (std::size_t l = 0; l < back.size(); ++l) CHECK(back[l] == ws.W[l]);

    Architecture small;
    small.encoder_sizes = {3, 2};
    small.tied = true;
    CHECK(weight_count(small) == 6);
    CHECK_THROWS(unflatten(Eigen::VectorXd::Zero(5), small));
}

TEST_CASE("a gradient step is the same in vector and matrix space") {
    const Architecture arch = build_architecture(Family::OneHid, 5, 2);
    TrainConfig cfg;
    cfg.seed = 8;
    WeightStack ws = init_weights(arch, cfg);
    const Eigen::MatrixXd batch = testutil::random_matrix(5, 6, 9);
    const double eta = 0.05;

    const auto grads = gradient(ws, arch, batch);
    const Eigen::VectorXd stepped = flatten(ws.W) - eta * flatten(grads);

    std::vector<Eigen::MatrixXd> matrix_step = ws.W;
    for (std::size_t l = 0; l < matrix_step.size(); ++l) matrix_step[l] -= eta * grads[l];
    CHECK((stepped - flatten(matrix_step)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fold_linear folds the residual projector into the first layer") {
    const Architecture arch = build_architecture(Family::ThreeSym, 6, 2);
    TrainConfig cfg;
    cfg.seed = 15;
    const WeightStack ws = init_weights(arch, cfg);

    SECTION("empty basis leaves the layer unchanged") {
        PcaBasis none;
        none.U.resize(6, 0);
        none.eigenvalues.resize(0);
        CHECK(fold_linear(ws, none) == ws.W.front());
    }
    SECTION("full basis zeroes the layer") {
        Dataset ds;
        ds.data = testutil::random_matrix(30, 6, 16);
        ds.data.rowwise() -= ds.data.colwise().mean();
        const PcaBasis full = pca_fit(ds, 6);
        CHECK(fold_linear(ws, full).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SECTION("folded forward equals explicit residual forward") {
        const double diff = fold_probe(Family::ThreeSym, 6, 2, 12, 55);
        CHECK(diff <= 1e-12);
        const double diff_untied = fold_probe(Family::OneHid, 6, 3, 12, 56);
        CHECK(diff_untied <= 1e-12);
    }
}
