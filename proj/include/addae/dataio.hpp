#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace addae {

/// Raw numeric table as read from disk: one row per observation.
struct RawTable {
    Eigen::MatrixXd values;                 // N x p
    std::vector<std::string> column_names;  // empty when the file had no header
};

/// Which of the p raw features survived constant-feature elimination.
struct FeatureMask {
    std::vector<bool> kept;  // length p
    int n = 0;               // number of true entries

    std::vector<int> kept_indices() const {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(n));
        for (int j = 0; j < static_cast<int>(kept.size()); ++j)
            if (kept[j]) idx.push_back(j);
        return idx;
    }
};

/// Per-feature bias removal: x -> (x - mean) * 2/(max - min), computed on the
/// training data and reapplied verbatim to unseen data.
struct NormalizationParams {
    Eigen::VectorXd means;   // length n
    Eigen::VectorXd scales;  // length n, each 2/(max - min)
};

struct Dataset {
    Eigen::MatrixXd data;  // N x n, zero mean and range 2 per feature
    NormalizationParams params;
    FeatureMask mask;

    int rows() const { return static_cast<int>(data.rows()); }
    int features() const { return static_cast<int>(data.cols()); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline void split_line(const std::string& line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
}

inline double parse_cell(std::string_view cell, std::size_t file_row, std::size_t col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw std::runtime_error("CSV parse error at row " + std::to_string(file_row) + ", column " +
                                 std::to_string(col + 1) + ": cannot parse '" + std::string(cell) + "' as a number");
    if (!std::isfinite(value))
        throw std::runtime_error("CSV parse error at row " + std::to_string(file_row) + ", column " +
                                 std::to_string(col + 1) + ": non-finite value '" + std::string(cell) + "'");
    return value;
}

}  // namespace detail

/// Reads a comma-separated numeric table. Every cell must parse as a finite
/// real number; failures report the 1-based file row and column.
inline RawTable load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    RawTable table;
    std::vector<std::vector<double>> rows;
    std::vector<std::string_view> cells;
    std::string line;
    std::size_t file_row = 0;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++file_row;
        if (detail::trim(line).empty()) continue;
        detail::split_line(line, cells);
        if (file_row == 1 && has_header) {
            for (auto c : cells) table.column_names.emplace_back(c);
            width = cells.size();
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw std::runtime_error("CSV parse error at row " + std::to_string(file_row) + ": expected " +
                                     std::to_string(width) + " cells, found " + std::to_string(cells.size()));
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j) row[j] = detail::parse_cell(cells[j], file_row, j);
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw std::runtime_error("'" + path + "' contains no data rows");

    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

/// Numerical-zero threshold for feature ranges: sqrt of the 64-bit machine
/// epsilon, approximately 1.4901e-8.
inline double constant_feature_threshold() {
    return std::sqrt(std::numeric_limits<double>::epsilon());
}

/// Keeps feature j iff max_j - min_j >= sqrt(machine epsilon).
inline FeatureMask eliminate_constant_features(const RawTable& table) {
    const Eigen::Index p = table.values.cols();
    if (p < 1 || table.values.rows() < 2) throw std::runtime_error("need at least 2 rows and 1 feature");

    FeatureMask mask;
    mask.kept.resize(static_cast<std::size_t>(p), false);
    const double tol = constant_feature_threshold();
    for (Eigen::Index j = 0; j < p; ++j) {
        const double range = table.values.col(j).maxCoeff() - table.values.col(j).minCoeff();
        if (range >= tol) {
            mask.kept[static_cast<std::size_t>(j)] = true;
            ++mask.n;
        }
    }
    if (mask.n == 0) throw std::runtime_error("no informative features: every column is constant");
    return mask;
}

/// Fits means and scales on the table and returns the normalized dataset.
inline Dataset normalize(const RawTable& table, const FeatureMask& mask) {
    if (static_cast<Eigen::Index>(mask.kept.size()) != table.values.cols())
        throw std::runtime_error("feature mask does not match table width");

    const Eigen::Index N = table.values.rows();
    Dataset ds;
    ds.mask = mask;
    ds.params.means.resize(mask.n);
    ds.params.scales.resize(mask.n);
    ds.data.resize(N, mask.n);

    int k = 0;
    for (int j = 0; j < static_cast<int>(mask.kept.size()); ++j) {
        if (!mask.kept[static_cast<std::size_t>(j)]) continue;
        const auto col = table.values.col(j);
        const double mean = col.mean();
        const double range = col.maxCoeff() - col.minCoeff();
        const double scale = 2.0 / range;
        ds.params.means(k) = mean;
        ds.params.scales(k) = scale;
        ds.data.col(k) = (col.array() - mean) * scale;
        ++k;
    }
    return ds;
}

/// Applies a stored mask and normalization to unseen data. The parameters are
/// never re-fit, so values outside the training range map outside [-1, 1].
inline Dataset apply_normalization(const NormalizationParams& params, const FeatureMask& mask,
                                   const RawTable& table) {
    if (static_cast<Eigen::Index>(mask.kept.size()) != table.values.cols())
        throw std::runtime_error("feature count mismatch: expected " + std::to_string(mask.kept.size()) +
                                 " raw features, got " + std::to_string(table.values.cols()));

    const Eigen::Index N = table.values.rows();
    Dataset ds;
    ds.mask = mask;
    ds.params = params;
    ds.data.resize(N, mask.n);
    int k = 0;
    for (int j = 0; j < static_cast<int>(mask.kept.size()); ++j) {
        if (!mask.kept[static_cast<std::size_t>(j)]) continue;
        ds.data.col(k) = (table.values.col(j).array() - params.means(k)) * params.scales(k);
        ++k;
    }
    return ds;
}

}  // namespace addae
