#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "addae/sweep.hpp"
#include "addae/train.hpp"
#include "addae/version.hpp"

namespace addae {

inline constexpr const char* kModelSchema = "addae_model_v1";
inline constexpr const char* kCellSchema = "addae_cell_v1";

/// Reproducibility stamp carried by every emitted artifact.
struct Provenance {
    std::string tool = kToolVersion;
    std::string config_hash;
    std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const Provenance& p) {
    return {{"tool", p.tool}, {"config_hash", p.config_hash}, {"seed", p.seed}};
}

namespace detail {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(M.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
    return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw std::runtime_error("matrix payload size mismatch");
    Eigen::MatrixXd M(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) M(i, j2) = data[k++];
    return M;
}

inline std::vector<double> vector_to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json optim_settings_to_json(const OptimSettings& s) {
    return {{"memory_pairs", s.memory_pairs},
            {"max_iters", s.max_iters},
            {"pretrain_max_iters", s.pretrain_max_iters},
            {"grad_tol", s.grad_tol},
            {"rel_cost_tol", s.rel_cost_tol},
            {"rel_cost_window", s.rel_cost_window},
            {"wolfe_c1", s.wolfe_c1},
            {"wolfe_c2", s.wolfe_c2}};
}

inline OptimSettings optim_settings_from_json(const nlohmann::json& j) {
    OptimSettings s;
    s.memory_pairs = j.value("memory_pairs", s.memory_pairs);
    s.max_iters = j.value("max_iters", s.max_iters);
    s.pretrain_max_iters = j.value("pretrain_max_iters", s.pretrain_max_iters);
    s.grad_tol = j.value("grad_tol", s.grad_tol);
    s.rel_cost_tol = j.value("rel_cost_tol", s.rel_cost_tol);
    s.rel_cost_window = j.value("rel_cost_window", s.rel_cost_window);
    s.wolfe_c1 = j.value("wolfe_c1", s.wolfe_c1);
    s.wolfe_c2 = j.value("wolfe_c2", s.wolfe_c2);
    return s;
}

inline nlohmann::json model_to_json(const TrainedModel& model, const OptimSettings& settings,
                                    const Provenance& prov) {
    nlohmann::json j;
    j["schema"] = kModelSchema;
    j["provenance"] = to_json(prov);
    j["family"] = family_tag(model.family);
    j["encoder_sizes"] = model.arch.encoder_sizes;
    j["tied"] = model.arch.tied;
    j["seed"] = model.seed;
    j["train_mrse"] = model.train_mrse;
    j["pretrain_costs"] = model.pretrain_costs;
    j["settings"] = optim_settings_to_json(settings);

    std::vector<bool> kept(model.mask.kept.begin(), model.mask.kept.end());
    j["mask"] = kept;
    j["means"] = detail::vector_to_std(model.params.means);
    j["scales"] = detail::vector_to_std(model.params.scales);
    j["basis"] = {{"U", detail::matrix_to_json(model.basis.U)},
                  {"eigenvalues", detail::vector_to_std(model.basis.eigenvalues)}};

    nlohmann::json weights = nlohmann::json::array();
    for (const auto& W : model.weights.W) weights.push_back(detail::matrix_to_json(W));
    j["weights"] = weights;
    j["beta"] = model.weights.beta;
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("schema"))
        throw std::runtime_error("not an addae model file (missing schema field)");
    if (j.at("schema").get<std::string>() != kModelSchema)
        throw std::runtime_error("unsupported model schema '" + j.at("schema").get<std::string>() +
                                 "' (expected " + std::string(kModelSchema) + ")");

    TrainedModel model;
    model.family = parse_family(j.at("family").get<std::string>());
    model.arch.family = model.family;
    model.arch.encoder_sizes = j.at("encoder_sizes").get<std::vector<int>>();
    model.arch.tied = j.at("tied").get<bool>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.train_mrse = j.at("train_mrse").get<double>();
    if (j.contains("pretrain_costs")) model.pretrain_costs = j.at("pretrain_costs").get<std::vector<double>>();

    const auto kept = j.at("mask").get<std::vector<bool>>();
    model.mask.kept.assign(kept.begin(), kept.end());
    model.mask.n = 0;
    for (bool b : model.mask.kept)
        if (b) ++model.mask.n;
    model.params.means = detail::vector_from_std(j.at("means").get<std::vector<double>>());
    model.params.scales = detail::vector_from_std(j.at("scales").get<std::vector<double>>());
    model.basis.U = detail::matrix_from_json(j.at("basis").at("U"));
    model.basis.eigenvalues = detail::vector_from_std(j.at("basis").at("eigenvalues").get<std::vector<double>>());

    for (const auto& w : j.at("weights")) model.weights.W.push_back(detail::matrix_from_json(w));
    model.weights.W0 = model.weights.W;
    model.weights.beta = j.at("beta").get<double>();

    if (model.params.means.size() != model.mask.n || model.basis.U.rows() != model.mask.n)
        throw std::runtime_error("model file is inconsistent (dimension mismatch)");
    return model;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("cannot parse '" + path + "': " + e.what());
    }
    return j;
}

inline void save_model(const TrainedModel& model, const OptimSettings& settings, const Provenance& prov,
                       const std::string& path) {
    save_json(model_to_json(model, settings, prov), path);
}

inline TrainedModel load_model(const std::string& path) { return model_from_json(load_json(path)); }

/// Trajectory CSV: one row per (family, dim) cell. A '#' comment line carries
/// the provenance stamp.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& dataset_name,
                                 const Provenance& prov, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "# " << prov.tool << " config=" << prov.config_hash << " seed=" << prov.seed << "\n";
    out << "dataset,family,dim,mrse,linear_mrse,seed\n";
    for (const auto& [fam, series] : traj.model_mrse) {
        for (std::size_t i = 0; i < traj.grid.values.size(); ++i) {
            out << dataset_name << "," << family_tag(fam) << "," << traj.grid.values[i] << ",";
            if (!std::isnan(series[i])) out << detail::format_double(series[i]);
            out << "," << detail::format_double(traj.linear_mrse[i]) << "," << prov.seed << "\n";
        }
    }
}

/// Plot-ready CSV: dim, the PCA baseline, and per family the MRSE and its
/// backward difference.
inline void write_plot_csv(const Trajectory& traj, const Provenance& prov, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "# " << prov.tool << " config=" << prov.config_hash << " seed=" << prov.seed << "\n";
    out << "dim,linear_mrse";
    for (const auto& [fam, series] : traj.model_mrse) {
        (void)series;
        out << "," << family_tag(fam) << "_mrse," << family_tag(fam) << "_dmrse";
    }
    out << "\n";
    for (std::size_t i = 0; i < traj.grid.values.size(); ++i) {
        out << traj.grid.values[i] << "," << detail::format_double(traj.linear_mrse[i]);
        for (const auto& [fam, series] : traj.model_mrse) {
            (void)fam;
            out << ",";
            if (!std::isnan(series[i])) out << detail::format_double(series[i]);
            out << ",";
            if (i > 0 && !std::isnan(series[i]) && !std::isnan(series[i - 1]))
                out << detail::format_double(series[i - 1] - series[i]);
        }
        out << "\n";
    }
}

}  // namespace addae
