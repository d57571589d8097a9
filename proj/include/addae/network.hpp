#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "addae/linear.hpp"
#include "addae/rng.hpp"

namespace addae {

// Bias-free feedforward autoencoders over PCA residual data. Layer count L is
// even; hidden layers are tanh-activated, the final layer is linear. Batches
// are stored one observation per column (n x N), so the forward pass reads
// exactly as o^l = f(W^l o^{l-1}).

enum class Family { OneHid, OneSym, ThreeSym, FiveSym, SevenSym };

inline const char* family_tag(Family f) {
    switch (f) {
        case Family::OneHid: return "1Hid";
        case Family::OneSym: return "1Sym";
        case Family::ThreeSym: return "3Sym";
        case Family::FiveSym: return "5Sym";
        case Family::SevenSym: return "7Sym";
    }
    throw std::invalid_argument("unknown family");
}

inline Family parse_family(const std::string& tag) {
    if (tag == "1Hid") return Family::OneHid;
    if (tag == "1Sym") return Family::OneSym;
    if (tag == "3Sym") return Family::ThreeSym;
    if (tag == "5Sym") return Family::FiveSym;
    if (tag == "7Sym") return Family::SevenSym;
    throw std::invalid_argument("unknown model family '" + tag + "' (expected 1Hid, 1Sym, 3Sym, 5Sym or 7Sym)");
}

inline const std::vector<Family>& all_families() {
    static const std::vector<Family> fams = {Family::OneHid, Family::OneSym, Family::ThreeSym,
                                             Family::FiveSym, Family::SevenSym};
    return fams;
}

/// Encoder layer sizes [n_0 = n, n_1, ..., n_Lhalf = m]. The decoder mirrors
/// the encoder, so the full network has L = 2 * (encoder_sizes.size() - 1)
/// layers. Symmetric families share the encoder matrices with the decoder
/// (formal adjoint); 1Hid keeps separate decoder weights.
struct Architecture {
    std::vector<int> encoder_sizes;
    bool tied = true;
    Family family = Family::OneSym;

    int input_dim() const { return encoder_sizes.front(); }
    int squeeze_dim() const { return encoder_sizes.back(); }
    int half_layers() const { return static_cast<int>(encoder_sizes.size()) - 1; }  // L/2
    int num_layers() const { return 2 * half_layers(); }                            // L
    int stored_matrices() const { return tied ? half_layers() : num_layers(); }

    /// Sizes of all L+1 activation stages, a palindrome [n, ..., m, ..., n].
    std::vector<int> layer_sizes() const {
        std::vector<int> sizes = encoder_sizes;
        for (int i = half_layers() - 1; i >= 0; --i) sizes.push_back(encoder_sizes[static_cast<std::size_t>(i)]);
        return sizes;
    }
};

/// Interior sizes follow the fixed patterns: 1Hid/1Sym squeeze directly, the
/// deeper families widen by 2m (3Sym), 4m-2m (5Sym) and 4m-3m-2m (7Sym).
/// Sizes above n are kept as computed (they occur whenever m > n/2).
inline Architecture build_architecture(Family family, int n, int m) {
    if (n < 1 || m < 1) throw std::invalid_argument("build_architecture: dimensions must be positive");
    Architecture arch;
    arch.family = family;
    switch (family) {
        case Family::OneHid:
            arch.encoder_sizes = {n, m};
            arch.tied = false;
            break;
        case Family::OneSym: arch.encoder_sizes = {n, m}; break;
        case Family::ThreeSym: arch.encoder_sizes = {n, 2 * m, m}; break;
        case Family::FiveSym: arch.encoder_sizes = {n, 4 * m, 2 * m, m}; break;
        case Family::SevenSym: arch.encoder_sizes = {n, 4 * m, 3 * m, 2 * m, m}; break;
    }
    return arch;
}

struct TrainConfig {
    double alpha = 1e-6;          // regularization weight in the cost
    double init_halfwidth = 0.1;  // weights start uniform on [-0.1, 0.1]
    std::uint64_t seed = 1;
    bool pretrain_post_activation = false;  // stage data f(W d) instead of W d
};

/// Stored weight matrices plus the frozen initial values that anchor the
/// regularization term. beta folds the network-size scaling into alpha.
struct WeightStack {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::MatrixXd> W0;
    double beta = 0.0;
};

/// beta = alpha / sqrt(sum of row counts over all L layers). Tied models count
/// each shared matrix in both its encoder and adjoint-decoder role.
inline double compute_beta(const Architecture& arch, double alpha) {
    const std::vector<int> sizes = arch.layer_sizes();
    double rows = 0.0;
    for (std::size_t l = 1; l < sizes.size(); ++l) rows += sizes[l];
    return alpha / std::sqrt(rows);
}

/// Shapes of the stored matrices, W^l being n_l x n_{l-1}.
inline std::vector<std::pair<int, int>> stored_shapes(const Architecture& arch) {
    const std::vector<int> sizes = arch.layer_sizes();
    std::vector<std::pair<int, int>> shapes;
    const int count = arch.stored_matrices();
    for (int l = 1; l <= count; ++l)
        shapes.emplace_back(sizes[static_cast<std::size_t>(l)], sizes[static_cast<std::size_t>(l - 1)]);
    return shapes;
}

/// Entries are filled i.i.d. uniform on [-halfwidth, halfwidth) in a fixed
/// order (matrices in layer order, each row-major) so a seed pins the stack.
inline WeightStack init_weights(const Architecture& arch, const TrainConfig& cfg) {
    UniformRng rng(cfg.seed);
    WeightStack stack;
    for (const auto& [r, c] : stored_shapes(arch)) {
        Eigen::MatrixXd W(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) W(i, j) = rng.next_symmetric(cfg.init_halfwidth);
        stack.W.push_back(std::move(W));
    }
    stack.W0 = stack.W;
    stack.beta = compute_beta(arch, cfg.alpha);
    return stack;
}

/// tanh written as in the forward model: f(x) = 2 / (1 + exp(-2x)) - 1.
inline Eigen::MatrixXd activate(const Eigen::MatrixXd& X) {
    return (2.0 / (1.0 + (-2.0 * X.array()).exp()) - 1.0).matrix();
}

namespace detail {

/// Weight of layer l (1-based) of the full L-layer network. For tied stacks
/// the decoder applies the stored matrices transposed in reverse order.
inline Eigen::MatrixXd effective_weight(const WeightStack& stack, const Architecture& arch, int l) {
    const int half = arch.half_layers();
    if (!arch.tied) return stack.W[static_cast<std::size_t>(l - 1)];
    if (l <= half) return stack.W[static_cast<std::size_t>(l - 1)];
    return stack.W[static_cast<std::size_t>(arch.num_layers() - l)].transpose();
}

}  // namespace detail

/// Activations of every layer for a batch (observations in columns).
struct ActivationTrace {
    std::vector<Eigen::MatrixXd> outputs;  // o^0 .. o^L
    std::vector<Eigen::MatrixXd> preacts;  // W^l o^{l-1} for hidden layers l = 1 .. L-1

    const Eigen::MatrixXd& output() const { return outputs.back(); }
    /// Squeezing-layer output o^{L/2}.
    const Eigen::MatrixXd& code(const Architecture& arch) const {
        return outputs[static_cast<std::size_t>(arch.half_layers())];
    }
};

/// Forward pass with an optional replacement for the first layer's weight
/// (used to fold the PCA residual operator into the network). The replacement
/// affects only layer 1; a tied decoder still ends with the stored (W^1)^T.
inline ActivationTrace forward_with_first_layer(const WeightStack& stack, const Architecture& arch,
                                                const Eigen::MatrixXd& batch_cols,
                                                const Eigen::MatrixXd* first_layer) {
    if (batch_cols.rows() != arch.input_dim())
        throw std::invalid_argument("forward: batch has " + std::to_string(batch_cols.rows()) +
                                    " rows, expected " + std::to_string(arch.input_dim()));
    const int L = arch.num_layers();
    ActivationTrace trace;
    trace.outputs.reserve(static_cast<std::size_t>(L + 1));
    trace.preacts.reserve(static_cast<std::size_t>(L - 1));
    trace.outputs.push_back(batch_cols);
    for (int l = 1; l <= L; ++l) {
        const Eigen::MatrixXd Wl =
            (l == 1 && first_layer != nullptr) ? *first_layer : detail::effective_weight(stack, arch, l);
        Eigen::MatrixXd pre = Wl * trace.outputs.back();
        if (l < L) {
            trace.outputs.push_back(activate(pre));
            trace.preacts.push_back(std::move(pre));
        } else {
            trace.outputs.push_back(std::move(pre));  // linear final layer
        }
    }
    return trace;
}

inline ActivationTrace forward(const WeightStack& stack, const Architecture& arch,
                               const Eigen::MatrixXd& batch_cols) {
    return forward_with_first_layer(stack, arch, batch_cols, nullptr);
}

/// First layer with the residual operator folded in: W^1 (I - U U^T).
/// Feeding normalized data through the folded layer equals feeding
/// (I - U U^T) x through the original network.
inline Eigen::MatrixXd fold_linear(const WeightStack& stack, const PcaBasis& basis) {
    const Eigen::MatrixXd& W1 = stack.W.front();
    if (basis.components() == 0) return W1;
    if (basis.U.rows() != W1.cols()) throw std::invalid_argument("fold_linear: dimension mismatch");
    return W1 - (W1 * basis.U) * basis.U.transpose();
}

/// Regularized mean least-squares cost,
///   J = 1/(2N) sum_i |o_i^L - x_i|^2 + beta/2 sum_l |W^l - W0^l|_F^2,
/// with the batch both input and target. Tied stacks regularize each stored
/// matrix once.
inline double cost(const WeightStack& stack, const Architecture& arch, const Eigen::MatrixXd& batch_cols) {
    const ActivationTrace trace = forward(stack, arch, batch_cols);
    const double N = static_cast<double>(batch_cols.cols());
    double J = (trace.output() - batch_cols).squaredNorm() / (2.0 * N);
    for (std::size_t s = 0; s < stack.W.size(); ++s) J += 0.5 * stack.beta * (stack.W[s] - stack.W0[s]).squaredNorm();
    return J;
}

/// Gradients with respect to every stored matrix, from the layerwise
/// backpropagation d^L = o^L - x, d^l = f'(pre^l) .* (W^{l+1})^T d^{l+1} with
/// f' = 1 - o^2 taken from the stored activations. In tied stacks each matrix
/// collects its encoder-role and (transposed) decoder-role contributions.
inline std::vector<Eigen::MatrixXd> gradient(const WeightStack& stack, const Architecture& arch,
                                             const Eigen::MatrixXd& batch_cols,
                                             const ActivationTrace& trace) {
    const int L = arch.num_layers();
    const int half = arch.half_layers();
    const double invN = 1.0 / static_cast<double>(batch_cols.cols());

    std::vector<Eigen::MatrixXd> grads(stack.W.size());
    for (std::size_t s = 0; s < stack.W.size(); ++s) grads[s] = Eigen::MatrixXd::Zero(stack.W[s].rows(), stack.W[s].cols());

    Eigen::MatrixXd d = trace.output() - batch_cols;  // d^L
    for (int l = L; l >= 1; --l) {
        const Eigen::MatrixXd& oin = trace.outputs[static_cast<std::size_t>(l - 1)];
        if (!arch.tied) {
            grads[static_cast<std::size_t>(l - 1)] += invN * (d * oin.transpose());
        } else if (l <= half) {
            grads[static_cast<std::size_t>(l - 1)] += invN * (d * oin.transpose());
        } else {
            // decoder layer l uses (W^s)^T with s = L - l + 1
            grads[static_cast<std::size_t>(L - l)] += invN * (oin * d.transpose());
        }
        if (l > 1) {
            const Eigen::MatrixXd Wl = detail::effective_weight(stack, arch, l);
            const Eigen::MatrixXd& o = trace.outputs[static_cast<std::size_t>(l - 1)];
            d = ((Wl.transpose() * d).array() * (1.0 - o.array().square())).matrix();
        }
    }
    for (std::size_t s = 0; s < stack.W.size(); ++s) grads[s] += stack.beta * (stack.W[s] - stack.W0[s]);
    return grads;
}

inline std::vector<Eigen::MatrixXd> gradient(const WeightStack& stack, const Architecture& arch,
                                             const Eigen::MatrixXd& batch_cols) {
    return gradient(stack, arch, batch_cols, forward(stack, arch, batch_cols));
}

/// Total number of stored weight entries.
inline Eigen::Index weight_count(const Architecture& arch) {
    Eigen::Index total = 0;
    for (const auto& [r, c] : stored_shapes(arch)) total += static_cast<Eigen::Index>(r) * c;
    return total;
}

/// Matrices concatenated in layer order, each row-major, into one vector.
inline Eigen::VectorXd flatten(const std::vector<Eigen::MatrixXd>& mats) {
    Eigen::Index total = 0;
    for (const auto& M : mats) total += M.size();
    Eigen::VectorXd v(total);
    Eigen::Index k = 0;
    for (const auto& M : mats)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j) v(k++) = M(i, j);
    return v;
}

inline std::vector<Eigen::MatrixXd> unflatten(const Eigen::VectorXd& v, const Architecture& arch) {
    if (v.size() != weight_count(arch))
        throw std::invalid_argument("unflatten: vector length " + std::to_string(v.size()) +
                                    " does not match architecture (" + std::to_string(weight_count(arch)) + ")");
    std::vector<Eigen::MatrixXd> mats;
    Eigen::Index k = 0;
    for (const auto& [r, c] : stored_shapes(arch)) {
        Eigen::MatrixXd M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = v(k++);
        mats.push_back(std::move(M));
    }
    return mats;
}

}  // namespace addae
