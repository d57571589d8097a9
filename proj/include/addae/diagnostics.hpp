#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "addae/dataio.hpp"
#include "addae/linear.hpp"
#include "addae/network.hpp"
#include "addae/optim.hpp"
#include "addae/train.hpp"

namespace addae {

// Self-contained correctness probes, kept deliberately independent of the
// implementation paths they cross-check. The eigensolver below is a plain
// cyclic Jacobi iteration, not Eigen's solver; the gradient probe goes
// through finite differences only.

/// Brute-force eigendecomposition of a symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in nonincreasing order with matching
/// columns in V.
inline void jacobi_eigensymm(Eigen::MatrixXd A, Eigen::VectorXd& values, Eigen::MatrixXd& V) {
    const Eigen::Index n = A.rows();
    V = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(1.0, A.norm());

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) <= 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) > A(b, b); });
    values.resize(n);
    Eigen::MatrixXd sorted(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        values(j) = A(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
        sorted.col(j) = V.col(order[static_cast<std::size_t>(j)]);
    }
    V = std::move(sorted);
}

struct CheckOutcome {
    std::string name;
    bool pass = false;
    double value = 0.0;      // the measured quantity
    double threshold = 0.0;  // what it was compared against
};

/// Objective for a random autoencoder instance of the given family.
inline Objective random_network_objective(Family family, int n, int m, int N, std::uint64_t seed,
                                          Architecture& arch, WeightStack& stack, Eigen::MatrixXd& batch) {
    arch = build_architecture(family, n, m);
    TrainConfig cfg;
    cfg.seed = seed;
    stack = init_weights(arch, cfg);
    // weights moved off the anchor so the regularization term is exercised
    UniformRng rng(mix_seed(seed, 7));
    for (auto& W : stack.W)
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) += rng.next_symmetric(0.05);
    batch.resize(n, N);
    for (Eigen::Index j = 0; j < batch.cols(); ++j)
        for (Eigen::Index i = 0; i < batch.rows(); ++i) batch(i, j) = rng.next_symmetric(0.8);
    return detail::weight_objective(arch, batch, stack.W0, stack.beta);
}

/// Analytic-vs-finite-difference gradient error for one random instance.
inline double gradient_probe(Family family, int n, int m, int N, std::uint64_t seed) {
    Architecture arch;
    WeightStack stack;
    Eigen::MatrixXd batch;
    const Objective obj = random_network_objective(family, n, m, N, seed, arch, stack, batch);
    return check_gradient(obj, flatten(stack.W), 1e-6);
}

/// Max-norm difference between the tied gradient and the sum of the untied
/// gradient blocks of the expanded network, evaluated at the tied point with
/// the data term only (the regularization anchors are set to the weights).
inline double tied_identity_probe(Family family, int n, int m, int N, std::uint64_t seed) {
    Architecture tied_arch;
    WeightStack tied_stack;
    Eigen::MatrixXd batch;
    random_network_objective(family, n, m, N, seed, tied_arch, tied_stack, batch);
    tied_stack.W0 = tied_stack.W;  // kill the anchor term; the identity concerns backpropagation

    Architecture untied = tied_arch;
    untied.tied = false;
    WeightStack expanded;
    expanded.beta = tied_stack.beta;
    const int half = tied_arch.half_layers();
    for (int l = 0; l < half; ++l) expanded.W.push_back(tied_stack.W[static_cast<std::size_t>(l)]);
    for (int l = half - 1; l >= 0; --l) expanded.W.push_back(tied_stack.W[static_cast<std::size_t>(l)].transpose());
    expanded.W0 = expanded.W;

    const auto tied_grads = gradient(tied_stack, tied_arch, batch);
    const auto untied_grads = gradient(expanded, untied, batch);

    double worst = 0.0;
    const int L = tied_arch.num_layers();
    for (int s = 1; s <= half; ++s) {
        const Eigen::MatrixXd combined = untied_grads[static_cast<std::size_t>(s - 1)] +
                                         untied_grads[static_cast<std::size_t>(L - s)].transpose();
        worst = std::max(worst,
                         (tied_grads[static_cast<std::size_t>(s - 1)] - combined).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// PCA implementation vs. the Jacobi oracle on an explicitly formed
/// covariance matrix: projector difference and eigenvalue-sum relative error.
inline void pca_oracle_probe(const Dataset& data, double& projector_diff, double& trace_rel_err) {
    const int n = data.features();
    const double N = static_cast<double>(data.rows());
    const PcaBasis fitted = pca_fit(data, n);

    const Eigen::MatrixXd cov = (data.data.transpose() * data.data) / N;
    Eigen::VectorXd oracle_vals;
    Eigen::MatrixXd oracle_vecs;
    jacobi_eigensymm(cov, oracle_vals, oracle_vecs);

    projector_diff = (fitted.U * fitted.U.transpose() - oracle_vecs * oracle_vecs.transpose()).cwiseAbs().maxCoeff();
    const double trace = cov.trace();
    trace_rel_err = std::abs(fitted.eigenvalues.sum() - trace) / std::max(1e-300, std::abs(trace));
    // also compare leading subspaces at a mid rank, where truncation matters
    const int mid = std::max(1, n / 2);
    const PcaBasis trunc = truncate_basis(fitted, mid);
    const Eigen::MatrixXd oracle_mid = oracle_vecs.leftCols(mid);
    projector_diff = std::max(projector_diff, (trunc.U * trunc.U.transpose() - oracle_mid * oracle_mid.transpose())
                                                  .cwiseAbs()
                                                  .maxCoeff());
}

/// Folded-first-layer equivalence: forwarding normalized data through
/// W^1 (I - U U^T) must equal forwarding the explicit residual.
inline double fold_probe(Family family, int n, int m, int N, std::uint64_t seed) {
    Architecture arch;
    WeightStack stack;
    Eigen::MatrixXd batch;
    random_network_objective(family, n, m, N, seed, arch, stack, batch);

    Eigen::MatrixXd rows = batch.transpose();
    Dataset ds;
    ds.data = rows.rowwise() - rows.colwise().mean();
    const PcaBasis basis = pca_fit(ds, std::max(1, n / 2));

    const Eigen::MatrixXd cols = ds.data.transpose();
    const Eigen::MatrixXd residual_cols = cols - basis.U * (basis.U.transpose() * cols);
    const Eigen::MatrixXd folded = fold_linear(stack, basis);
    const ActivationTrace direct = forward(stack, arch, residual_cols);
    const ActivationTrace via_fold = forward_with_first_layer(stack, arch, cols, &folded);
    return (direct.output() - via_fold.output()).cwiseAbs().maxCoeff();
}

/// The pass/fail battery behind the `check` command.
inline std::vector<CheckOutcome> run_check_battery(const Dataset& data, std::uint64_t seed) {
    std::vector<CheckOutcome> out;

    for (Family fam : all_families()) {
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial)
            worst = std::max(worst, gradient_probe(fam, 5 + trial, 2 + trial % 2, 7, mix_seed(seed, 11 + trial)));
        out.push_back({std::string("gradient/") + family_tag(fam), worst <= 1e-5, worst, 1e-5});
    }
    for (Family fam : {Family::OneSym, Family::ThreeSym, Family::FiveSym, Family::SevenSym}) {
        const double diff = tied_identity_probe(fam, 6, 2, 5, mix_seed(seed, 23));
        out.push_back({std::string("tied_identity/") + family_tag(fam), diff <= 1e-12, diff, 1e-12});
    }

    double projector_diff = 0.0, trace_rel = 0.0;
    pca_oracle_probe(data, projector_diff, trace_rel);
    out.push_back({"pca/projector_vs_oracle", projector_diff <= 1e-8, projector_diff, 1e-8});
    out.push_back({"pca/eigenvalue_trace", trace_rel <= 1e-8, trace_rel, 1e-8});

    double mean_err = 0.0, range_err = 0.0;
    for (int j = 0; j < data.features(); ++j) {
        mean_err = std::max(mean_err, std::abs(data.data.col(j).mean()));
        range_err = std::max(range_err, std::abs(data.data.col(j).maxCoeff() - data.data.col(j).minCoeff() - 2.0));
    }
    out.push_back({"normalization/mean", mean_err <= 1e-10, mean_err, 1e-10});
    out.push_back({"normalization/range", range_err <= 1e-10, range_err, 1e-10});

    const double fold_diff = fold_probe(Family::ThreeSym, 6, 2, 9, mix_seed(seed, 29));
    out.push_back({"fold_linear/equivalence", fold_diff <= 1e-12, fold_diff, 1e-12});

    return out;
}

}  // namespace addae
