#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "addae/train.hpp"

namespace addae {

/// Mean root squared error, e = (1/N) sqrt(sum_i |x_i - o_i|^2). Differs from
/// RMSE only in the 1/N (not 1/sqrt(N)) scaling.
inline double mrse(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& outputs) {
    if (targets.rows() != outputs.rows() || targets.cols() != outputs.cols())
        throw std::invalid_argument("mrse: shape mismatch");
    const double N = static_cast<double>(targets.rows());
    return std::sqrt((targets - outputs).squaredNorm()) / N;
}

enum class GridMode { Small, Large };

inline const char* grid_mode_name(GridMode m) { return m == GridMode::Small ? "small" : "large"; }

inline GridMode parse_grid_mode(const std::string& s) {
    if (s == "small") return GridMode::Small;
    if (s == "large") return GridMode::Large;
    throw std::invalid_argument("unknown mode '" + s + "' (expected small or large)");
}

struct DimGrid {
    std::vector<int> values;  // strictly increasing, uniform step
    int step = 1;
};

/// Small data: every squeezing dimension 1 .. n-1. Large data: 10, 20, ...
/// up to floor(0.6 n).
inline DimGrid make_grid(int n, GridMode mode) {
    if (n < 2) throw std::invalid_argument("make_grid: need n >= 2");
    DimGrid grid;
    if (mode == GridMode::Small) {
        grid.step = 1;
        for (int m = 1; m <= n - 1; ++m) grid.values.push_back(m);
    } else {
        grid.step = 10;
        const int max_dim = static_cast<int>(std::floor(0.6 * n));
        for (int m = 10; m <= max_dim; m += 10) grid.values.push_back(m);
        if (grid.values.empty())
            throw std::invalid_argument("make_grid: large mode needs floor(0.6 n) >= 10 (n >= 17)");
    }
    return grid;
}

constexpr double kMissingCell = std::numeric_limits<double>::quiet_NaN();

/// MRSE trajectories over a dimension grid, one series per model family plus
/// the PCA-only baseline. Failed cells hold NaN.
struct Trajectory {
    DimGrid grid;
    int n = 0;  // post-filter feature count of the swept dataset
    std::map<Family, std::vector<double>> model_mrse;
    std::vector<double> linear_mrse;

    bool has(Family f) const { return model_mrse.count(f) > 0; }
    const std::vector<double>& series(Family f) const {
        auto it = model_mrse.find(f);
        if (it == model_mrse.end()) throw std::invalid_argument(std::string("no trajectory for ") + family_tag(f));
        return it->second;
    }

    /// Pointwise minimum over all family series, ignoring missing cells.
    std::vector<double> min_series() const {
        std::vector<double> out(grid.values.size(), kMissingCell);
        for (const auto& [fam, series] : model_mrse) {
            (void)fam;
            for (std::size_t i = 0; i < series.size(); ++i) {
                if (std::isnan(series[i])) continue;
                if (std::isnan(out[i]) || series[i] < out[i]) out[i] = series[i];
            }
        }
        return out;
    }
};

enum class DetectionSource { SingleModel, MinOverModels };

inline const char* detection_source_name(DetectionSource s) {
    return s == DetectionSource::SingleModel ? "single_model" : "min_over_models";
}

inline DetectionSource parse_detection_source(const std::string& s) {
    if (s == "single_model") return DetectionSource::SingleModel;
    if (s == "min_over_models") return DetectionSource::MinOverModels;
    throw std::invalid_argument("unknown detection source '" + s + "'");
}

struct DetectionConfig {
    double tau = 4e-3;
    DetectionSource source = DetectionSource::SingleModel;
    Family family = Family::OneHid;  // series used when source == SingleModel
};

inline double default_tau(GridMode mode) { return mode == GridMode::Small ? 4e-3 : 3e-3; }

struct DetectionResult {
    bool detected = false;
    int id = 0;                  // intrinsic dimension (grid value before the trigger)
    int triggering_dim = 0;      // first grid value whose backward difference fell below tau
    double reduction_rate = 0.0; // id / n
    double mrse_at_id = 0.0;     // selected series at id
};

/// Thresholded knee detection: scanning from the second grid point, the first
/// backward difference s(previous) - s(current) below tau marks the trigger;
/// the intrinsic dimension is one grid step earlier. Missing cells never
/// trigger. Returns detected = false when no difference falls below tau.
inline DetectionResult detect_id(const Trajectory& traj, const DetectionConfig& cfg) {
    if (traj.grid.values.size() < 2) throw std::invalid_argument("detect_id: trajectory needs at least 2 grid points");
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("detect_id: tau must be positive");

    const std::vector<double> series =
        cfg.source == DetectionSource::MinOverModels ? traj.min_series() : traj.series(cfg.family);

    DetectionResult res;
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (std::isnan(series[i - 1]) || std::isnan(series[i])) continue;
        if (series[i - 1] - series[i] < cfg.tau) {
            res.detected = true;
            res.triggering_dim = traj.grid.values[i];
            res.id = res.triggering_dim - traj.grid.step;
            res.reduction_rate = traj.n > 0 ? static_cast<double>(res.id) / traj.n : 0.0;
            res.mrse_at_id = series[i - 1];
            return res;
        }
    }
    return res;
}

/// Grid value with the largest nonlinear gain (linear MRSE minus series MRSE).
inline std::optional<int> max_nonlinear_gain_dim(const Trajectory& traj, const std::vector<double>& series) {
    std::optional<int> best_dim;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (std::isnan(series[i]) || std::isnan(traj.linear_mrse[i])) continue;
        const double gain = traj.linear_mrse[i] - series[i];
        if (gain > best_gain) {
            best_gain = gain;
            best_dim = traj.grid.values[i];
        }
    }
    return best_dim;
}

/// Efficiency of a family against the 1Hid baseline, over the grid values
/// from the first through ID minus one step (the search phase of the ID).
/// efficiency(m) = s_1Hid(m) / s_family(m).
struct EfficiencyStats {
    double mean = 0.0;
    double max = 0.0;
    int argmax_dim = 0;
    int cells_used = 0;
    bool excluded_cells = false;  // zero-baseline or missing cells were skipped
};

inline std::map<Family, EfficiencyStats> efficiency_table(const Trajectory& traj, const DetectionResult& det) {
    if (!traj.has(Family::OneHid)) throw std::invalid_argument("efficiency_table: 1Hid series required");
    if (!det.detected) throw std::invalid_argument("efficiency_table: ID not detected");
    const std::vector<double>& base = traj.series(Family::OneHid);
    const int last_dim = det.id - traj.grid.step;

    std::map<Family, EfficiencyStats> table;
    for (const auto& [fam, series] : traj.model_mrse) {
        EfficiencyStats st;
        double sum = 0.0;
        st.max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < traj.grid.values.size() && traj.grid.values[i] <= last_dim; ++i) {
            if (std::isnan(series[i]) || std::isnan(base[i]) || base[i] == 0.0) {
                st.excluded_cells = true;
                continue;
            }
            const double eff = base[i] / series[i];
            sum += eff;
            ++st.cells_used;
            if (eff > st.max) {
                st.max = eff;
                st.argmax_dim = traj.grid.values[i];
            }
        }
        if (st.cells_used > 0) {
            st.mean = sum / st.cells_used;
            table[fam] = st;
        }
    }
    return table;
}

inline std::optional<double> pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson_correlation: length mismatch");
    double n = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        ma += a[i];
        mb += b[i];
        n += 1.0;
    }
    if (n < 2.0) return std::nullopt;
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;  // constant series
    return sab / std::sqrt(saa * sbb);
}

/// One (family, m) cell of a sweep.
struct CellResult {
    Family family = Family::OneHid;
    int m = 0;
    bool ok = false;
    std::string error;
    double mrse = kMissingCell;
    TrainedModel model;  // populated only for freshly trained cells
};

/// Hooks for persistence and testing. `lookup` short-circuits a cell with a
/// previously stored MRSE (resume); `on_cell` observes each freshly computed
/// cell; `runner` replaces the training step entirely (tests, schedulers).
struct SweepHooks {
    std::function<std::optional<double>(Family, int)> lookup;
    std::function<void(const CellResult&)> on_cell;
    std::function<CellResult(Family, int)> runner;
};

inline CellResult run_cell(const Dataset& dataset, const PcaBasis& full_basis, Family family, int m,
                           const TrainConfig& cfg, const OptimSettings& settings) {
    CellResult cell;
    cell.family = family;
    cell.m = m;
    try {
        cell.model = train_additive(dataset, family, m, cfg, settings, &full_basis);
        cell.mrse = cell.model.train_mrse;
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

/// Sequential sweep over every (family, m) cell. Cell failures are recorded
/// as missing values and do not abort the sweep.
inline Trajectory run_sweep(const Dataset& dataset, const std::vector<Family>& families, const DimGrid& grid,
                            const TrainConfig& cfg, const OptimSettings& settings, const SweepHooks& hooks = {}) {
    if (families.empty()) throw std::invalid_argument("run_sweep: no families");
    const int n = dataset.features();
    for (int m : grid.values)
        if (m < 1 || m >= n) throw std::invalid_argument("run_sweep: grid value " + std::to_string(m) + " outside [1, n-1]");

    const PcaBasis full_basis = pca_fit(dataset, n);
    const double N = static_cast<double>(dataset.rows());

    Trajectory traj;
    traj.grid = grid;
    traj.n = n;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const PcaBasis b = truncate_basis(full_basis, grid.values[i]);
        traj.linear_mrse.push_back(std::sqrt(residual_rows(b, dataset.data).squaredNorm()) / N);
    }

    for (Family fam : families) traj.model_mrse[fam].assign(grid.values.size(), kMissingCell);
    for (Family fam : families) {
        for (std::size_t i = 0; i < grid.values.size(); ++i) {
            const int m = grid.values[i];
            if (hooks.lookup) {
                if (auto cached = hooks.lookup(fam, m)) {
                    traj.model_mrse[fam][i] = *cached;
                    continue;
                }
            }
            CellResult cell = hooks.runner ? hooks.runner(fam, m) : run_cell(dataset, full_basis, fam, m, cfg, settings);
            traj.model_mrse[fam][i] = cell.mrse;
            if (hooks.on_cell) hooks.on_cell(cell);
        }
    }
    return traj;
}

/// Validation-set MRSE for a per-m series of trained models, plus the Pearson
/// correlation between the training and validation series.
struct GeneralizationReport {
    std::vector<int> dims;
    std::vector<double> train_mrse;
    std::vector<double> valid_mrse;
    std::optional<double> correlation;  // empty when a series is constant
    bool degenerate = false;
};

inline GeneralizationReport generalization_score(const std::vector<TrainedModel>& models, const RawTable& validation) {
    GeneralizationReport rep;
    for (const TrainedModel& model : models) {
        const Dataset vd = apply_normalization(model.params, model.mask, validation);
        rep.dims.push_back(model.squeeze_dim());
        rep.train_mrse.push_back(model.train_mrse);
        rep.valid_mrse.push_back(reconstruction_mrse(model, vd.data));
    }
    rep.correlation = pearson_correlation(rep.train_mrse, rep.valid_mrse);
    rep.degenerate = !rep.correlation.has_value();
    return rep;
}

}  // namespace addae
