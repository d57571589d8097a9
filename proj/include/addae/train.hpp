#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "addae/dataio.hpp"
#include "addae/linear.hpp"
#include "addae/network.hpp"
#include "addae/optim.hpp"

namespace addae {

// Serial estimation of the additive model: the dataset normalization is the
// bias part, PCA the linear part, and a bias-free autoencoder fitted to the
// PCA residual the nonlinear part. Deployment sums the three.

/// Everything needed to apply the additive autoencoder to unseen rows.
struct TrainedModel {
    Family family = Family::OneSym;
    Architecture arch;
    WeightStack weights;
    PcaBasis basis;
    NormalizationParams params;
    FeatureMask mask;
    std::uint64_t seed = 0;
    double train_mrse = 0.0;
    std::vector<double> pretrain_costs;  // final cost of each pretraining stage
    OptimResult optim;                   // fine-tuning run

    int squeeze_dim() const { return arch.squeeze_dim(); }
};

/// Relative change of each stored weight-matrix norm over fine-tuning,
/// | |W0| - |W*| | / |W0|. A vanishing-gradient symptom would show up as the
/// deeper layers changing on a smaller scale than the heads.
struct LayerChangeReport {
    std::vector<double> change;          // relative, or absolute where flagged
    std::vector<bool> zero_norm_anchor;  // true when |W0| = 0 (absolute change reported)
};

namespace detail {

/// Cost + gradient of Eq.-style J over the flattened stored weights. The
/// referenced architecture, batch and anchors must outlive the objective.
inline Objective weight_objective(const Architecture& arch, const Eigen::MatrixXd& batch_cols,
                                  const std::vector<Eigen::MatrixXd>& anchors, double beta) {
    return [&arch, &batch_cols, &anchors, beta](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        WeightStack stack;
        stack.W = unflatten(x, arch);
        stack.W0 = anchors;
        stack.beta = beta;
        const ActivationTrace trace = forward(stack, arch, batch_cols);
        const double N = static_cast<double>(batch_cols.cols());
        double J = (trace.output() - batch_cols).squaredNorm() / (2.0 * N);
        for (std::size_t s = 0; s < stack.W.size(); ++s)
            J += 0.5 * beta * (stack.W[s] - anchors[s]).squaredNorm();
        grad = flatten(gradient(stack, arch, batch_cols, trace));
        return J;
    };
}

inline double mrse_cols(const Eigen::MatrixXd& targets_cols, const Eigen::MatrixXd& outputs_cols) {
    const double N = static_cast<double>(targets_cols.cols());
    return std::sqrt((outputs_cols - targets_cols).squaredNorm()) / N;
}

}  // namespace detail

struct PretrainResult {
    WeightStack stack;                 // W0 reset to the pretrained values
    std::vector<double> stage_costs;   // final cost per stage
    std::vector<int> stage_input_dims; // data dimension seen by each stage
};

/// Layerwise pretraining from the heads inward. Stage k fits the one-matrix
/// symmetric autoencoder d -> (W^k)^T f(W^k d) on D_k, then the stage output
/// {W^k d} (pre-activation by default) becomes D_{k+1}. Optimizer failures in
/// a stage are not fatal; the best iterate is kept.
inline PretrainResult pretrain_stack(const Architecture& arch, const Eigen::MatrixXd& residual_cols,
                                     const TrainConfig& cfg, const OptimSettings& settings) {
    if (!arch.tied) throw std::invalid_argument("pretrain_stack: architecture must be tied");
    const OptimSettings stage_settings = settings.for_pretraining();

    PretrainResult out;
    Eigen::MatrixXd stage_data = residual_cols;
    for (int k = 1; k <= arch.half_layers(); ++k) {
        const int in_dim = arch.encoder_sizes[static_cast<std::size_t>(k - 1)];
        const int out_dim = arch.encoder_sizes[static_cast<std::size_t>(k)];
        Architecture sub;
        sub.encoder_sizes = {in_dim, out_dim};
        sub.tied = true;
        sub.family = Family::OneSym;

        TrainConfig sub_cfg = cfg;
        sub_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
        WeightStack ws = init_weights(sub, sub_cfg);

        const Objective obj = detail::weight_objective(sub, stage_data, ws.W0, ws.beta);
        const OptimResult res = minimize(obj, flatten(ws.W), stage_settings);

        Eigen::MatrixXd Wk = unflatten(res.x, sub).front();
        out.stage_costs.push_back(res.cost);
        out.stage_input_dims.push_back(in_dim);
        if (k < arch.half_layers()) {
            stage_data = cfg.pretrain_post_activation ? activate(Wk * stage_data)
                                                      : Eigen::MatrixXd(Wk * stage_data);
        }
        out.stack.W.push_back(std::move(Wk));
    }
    out.stack.W0 = out.stack.W;  // anchor for the fine-tuning run
    out.stack.beta = compute_beta(arch, cfg.alpha);
    return out;
}

struct FinetuneResult {
    WeightStack weights;
    OptimResult optim;
};

/// Joint minimization over all stored matrices starting from (and anchored
/// at) the supplied weights.
inline FinetuneResult finetune(WeightStack pretrained, const Architecture& arch,
                               const Eigen::MatrixXd& residual_cols, const TrainConfig& cfg,
                               const OptimSettings& settings) {
    pretrained.W0 = pretrained.W;
    pretrained.beta = compute_beta(arch, cfg.alpha);

    const Objective obj = detail::weight_objective(arch, residual_cols, pretrained.W0, pretrained.beta);
    OptimResult res = minimize(obj, flatten(pretrained.W), settings);
    pretrained.W = unflatten(res.x, arch);

    FinetuneResult out;
    out.weights = std::move(pretrained);
    out.optim = std::move(res);
    return out;
}

struct WarmstartResult {
    Architecture arch;
    WeightStack weights;
    OptimResult optim;
    double sym_cost = 0.0;  // final cost of the symmetric phase
};

/// 1Sym -> 1Hid: the shared matrix W^1 is optimized first, then the untied
/// model starts (and is anchored) at encoder W^1, decoder (W^1)^T.
inline WarmstartResult warmstart_1hid(const Eigen::MatrixXd& residual_cols, int m, const TrainConfig& cfg,
                                      const OptimSettings& settings) {
    const int n = static_cast<int>(residual_cols.rows());
    Architecture sym = build_architecture(Family::OneSym, n, m);
    const PretrainResult pre = pretrain_stack(sym, residual_cols, cfg, settings);

    WarmstartResult out;
    out.sym_cost = pre.stage_costs.front();
    out.arch = build_architecture(Family::OneHid, n, m);
    out.weights.W = {pre.stack.W.front(), pre.stack.W.front().transpose()};
    FinetuneResult ft = finetune(std::move(out.weights), out.arch, residual_cols, cfg, settings);
    out.weights = std::move(ft.weights);
    out.optim = std::move(ft.optim);
    return out;
}

/// Full training of one (family, m) cell: PCA at m, residual formation, then
/// pretraining (symmetric families) or the 1Sym warm start (1Hid), and joint
/// fine-tuning. The reported MRSE scores the additive reconstruction
/// U U^T x + AE((I - U U^T) x) against the normalized data.
/// A full-rank basis may be passed to avoid refitting PCA per cell.
inline TrainedModel train_additive(const Dataset& dataset, Family family, int m, const TrainConfig& cfg,
                                   const OptimSettings& settings, const PcaBasis* full_basis = nullptr) {
    const int n = dataset.features();
    if (m < 1 || m >= n) throw std::invalid_argument("train_additive: need 1 <= m < n");

    TrainedModel model;
    model.family = family;
    model.params = dataset.params;
    model.mask = dataset.mask;
    model.seed = cfg.seed;
    model.basis = full_basis != nullptr ? truncate_basis(*full_basis, m) : pca_fit(dataset, m);

    const Eigen::MatrixXd data_cols = dataset.data.transpose();
    const Eigen::MatrixXd residual_cols = data_cols - model.basis.U * (model.basis.U.transpose() * data_cols);

    if (family == Family::OneHid) {
        WarmstartResult ws = warmstart_1hid(residual_cols, m, cfg, settings);
        model.arch = std::move(ws.arch);
        model.weights = std::move(ws.weights);
        model.optim = std::move(ws.optim);
        model.pretrain_costs = {ws.sym_cost};
    } else {
        model.arch = build_architecture(family, n, m);
        PretrainResult pre = pretrain_stack(model.arch, residual_cols, cfg, settings);
        model.pretrain_costs = std::move(pre.stage_costs);
        FinetuneResult ft = finetune(std::move(pre.stack), model.arch, residual_cols, cfg, settings);
        model.weights = std::move(ft.weights);
        model.optim = std::move(ft.optim);
    }

    const ActivationTrace trace = forward(model.weights, model.arch, residual_cols);
    const Eigen::MatrixXd recon_cols = data_cols - residual_cols + trace.output();
    model.train_mrse = detail::mrse_cols(data_cols, recon_cols);
    return model;
}

inline LayerChangeReport weight_change_report(const TrainedModel& model) {
    LayerChangeReport report;
    for (std::size_t l = 0; l < model.weights.W.size(); ++l) {
        const double n0 = model.weights.W0[l].norm();
        const double n1 = model.weights.W[l].norm();
        if (n0 > 0.0) {
            report.change.push_back(std::abs(n0 - n1) / n0);
            report.zero_norm_anchor.push_back(false);
        } else {
            report.change.push_back(std::abs(n1));
            report.zero_norm_anchor.push_back(true);
        }
    }
    return report;
}

namespace detail {

/// Squeezing-layer codes and additive reconstructions for normalized rows,
/// computed through the folded first layer (the residual is never formed).
struct AdditiveOutputs {
    Eigen::MatrixXd codes_cols;  // m x N
    Eigen::MatrixXd recon_cols;  // n x N
};

inline AdditiveOutputs apply_additive(const TrainedModel& model, const Eigen::MatrixXd& normalized_rows) {
    const Eigen::MatrixXd X_cols = normalized_rows.transpose();
    const Eigen::MatrixXd folded = fold_linear(model.weights, model.basis);
    const ActivationTrace trace = forward_with_first_layer(model.weights, model.arch, X_cols, &folded);
    const Eigen::MatrixXd proj = model.basis.U.transpose() * X_cols;  // y = U^T x

    AdditiveOutputs out;
    out.codes_cols = proj + trace.code(model.arch);
    out.recon_cols = model.basis.U * proj + trace.output();
    return out;
}

}  // namespace detail

/// m-dimensional representation of raw rows: U^T x + o^{L/2}.
inline Eigen::MatrixXd encode(const TrainedModel& model, const RawTable& raw) {
    const Dataset ds = apply_normalization(model.params, model.mask, raw);
    return detail::apply_additive(model, ds.data).codes_cols.transpose();
}

/// Additive reconstruction of raw rows in the normalized space.
inline Eigen::MatrixXd reconstruct(const TrainedModel& model, const RawTable& raw) {
    const Dataset ds = apply_normalization(model.params, model.mask, raw);
    return detail::apply_additive(model, ds.data).recon_cols.transpose();
}

/// MRSE of the additive reconstruction on already-normalized rows.
inline double reconstruction_mrse(const TrainedModel& model, const Eigen::MatrixXd& normalized_rows) {
    const auto out = detail::apply_additive(model, normalized_rows);
    return detail::mrse_cols(normalized_rows.transpose(), out.recon_cols);
}

}  // namespace addae
