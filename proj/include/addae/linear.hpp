#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "addae/dataio.hpp"

namespace addae {

/// Linear trend of the normalized data: the m leading eigenvectors of the
/// covariance matrix (1/N) X^T X, eigenvalues in nonincreasing order.
struct PcaBasis {
    Eigen::MatrixXd U;            // n x m, orthonormal columns
    Eigen::VectorXd eigenvalues;  // length m, nonincreasing, clamped at 0

    int input_dim() const { return static_cast<int>(U.rows()); }
    int components() const { return static_cast<int>(U.cols()); }
};

namespace detail {

/// Sign convention: the entry of largest magnitude in each column is made
/// positive. Eigenvectors are sign-ambiguous; this pins a reproducible choice.
inline void fix_column_signs(Eigen::MatrixXd& U) {
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
        Eigen::Index imax = 0;
        U.col(j).cwiseAbs().maxCoeff(&imax);
        if (U(imax, j) < 0.0) U.col(j) = -U.col(j);
    }
}

}  // namespace detail

/// Eigendecomposition of the covariance of already-centered data. The basis is
/// fit at full rank and truncated to the m leading components.
inline PcaBasis pca_fit(const Dataset& data, int m) {
    const int n = data.features();
    const Eigen::Index N = data.data.rows();
    if (m < 1 || m > n) throw std::invalid_argument("pca_fit: m must be in [1, n]");

    Eigen::MatrixXd cov = (data.data.transpose() * data.data) / static_cast<double>(N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigendecomposition failed");

    // Eigen returns ascending order; reverse to nonincreasing.
    PcaBasis basis;
    basis.U.resize(n, m);
    basis.eigenvalues.resize(m);
    for (int j = 0; j < m; ++j) {
        basis.U.col(j) = solver.eigenvectors().col(n - 1 - j);
        basis.eigenvalues(j) = std::max(0.0, solver.eigenvalues()(n - 1 - j));
    }
    detail::fix_column_signs(basis.U);
    return basis;
}

/// First m columns of an already-fitted basis.
inline PcaBasis truncate_basis(const PcaBasis& basis, int m) {
    if (m < 0 || m > basis.components()) throw std::invalid_argument("truncate_basis: m out of range");
    PcaBasis out;
    out.U = basis.U.leftCols(m);
    out.eigenvalues = basis.eigenvalues.head(m);
    return out;
}

/// (I - U U^T) x: the part of x not explained by the retained components.
inline Eigen::VectorXd residual(const PcaBasis& basis, const Eigen::VectorXd& x) {
    if (x.size() != basis.U.rows()) throw std::invalid_argument("residual: dimension mismatch");
    if (basis.components() == 0) return x;
    return x - basis.U * (basis.U.transpose() * x);
}

/// Row-wise residual of an N x n matrix.
inline Eigen::MatrixXd residual_rows(const PcaBasis& basis, const Eigen::MatrixXd& X) {
    if (X.cols() != basis.U.rows()) throw std::invalid_argument("residual_rows: dimension mismatch");
    if (basis.components() == 0) return X;
    return X - (X * basis.U) * basis.U.transpose();
}

/// Projection y = U^T x per row.
inline Eigen::MatrixXd project_rows(const PcaBasis& basis, const Eigen::MatrixXd& X) {
    return X * basis.U;
}

/// MRSE of the PCA-only reconstruction for each grid value of m,
/// e(m) = (1/N) sqrt(sum_i |x_i - U U^T x_i|^2). Nonincreasing in m.
inline std::vector<double> linear_mrse_curve(const Dataset& data, const std::vector<int>& dims) {
    const int n = data.features();
    const double N = static_cast<double>(data.data.rows());
    PcaBasis full = pca_fit(data, n);

    std::vector<double> curve;
    curve.reserve(dims.size());
    for (int m : dims) {
        if (m < 1 || m > n) throw std::invalid_argument("linear_mrse_curve: grid value out of [1, n]");
        PcaBasis b = truncate_basis(full, m);
        curve.push_back(std::sqrt(residual_rows(b, data.data).squaredNorm()) / N);
    }
    return curve;
}

/// One row per component: index, eigenvalue, then the n loadings.
inline void export_basis_csv(const PcaBasis& basis, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.precision(17);
    out << "component,eigenvalue";
    for (int j = 0; j < basis.input_dim(); ++j) out << ",loading" << j;
    out << "\n";
    for (int c = 0; c < basis.components(); ++c) {
        out << c + 1 << "," << basis.eigenvalues(c);
        for (int j = 0; j < basis.input_dim(); ++j) out << "," << basis.U(j, c);
        out << "\n";
    }
}

}  // namespace addae
