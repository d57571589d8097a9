// addae: intrinsic-dimension estimation with additive autoencoders.
//
// Subcommands:
//   estimate  sweep squeezing dimensions, detect the intrinsic dimension,
//             emit trajectory/detection/efficiency artifacts and the model
//             at the detected dimension
//   sweep     trajectory only, no detection
//   validate  score a stored model (or a sweep's cell directory) on
//             held-out data
//   check     self-diagnostics: gradient checks, PCA oracle comparison,
//             normalization invariants
//
// Every flag can also be supplied through an ADDAE_* environment variable,
// and exit codes are a stable contract: 0 success, 1 error, 2 not detected.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "addae/addae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace addae;

namespace {

constexpr const char* kConfigSchema = "addae_config_v1";

struct RunConfig {
    std::string data;
    std::string validation;
    std::string out = "addae_out";
    bool has_header = false;
    std::string mode = "small";
    std::vector<std::string> families = {"1Hid", "1Sym"};
    double tau = 0.0;  // 0 means: use the mode default
    std::uint64_t seed = 1;
    int jobs = 0;  // 0 means: hardware concurrency
    bool resume = false;
    std::string detection_source = "single_model";
    std::string detection_family = "1Hid";
    std::string pretrain_target = "pre_activation";
    bool dump_cost_history = false;
    OptimSettings optim;
    double alpha = 1e-6;
    double init_halfwidth = 0.1;

    GridMode grid_mode() const { return parse_grid_mode(mode); }
    double effective_tau() const { return tau > 0.0 ? tau : default_tau(grid_mode()); }

    TrainConfig train_config() const {
        TrainConfig cfg;
        cfg.alpha = alpha;
        cfg.init_halfwidth = init_halfwidth;
        cfg.seed = seed;
        if (pretrain_target == "pre_activation")
            cfg.pretrain_post_activation = false;
        else if (pretrain_target == "post_activation")
            cfg.pretrain_post_activation = true;
        else
            throw std::runtime_error("config: pretrain_target must be pre_activation or post_activation");
        return cfg;
    }

    std::vector<Family> family_list() const {
        std::vector<Family> fams;
        for (const auto& tag : families) fams.push_back(parse_family(tag));
        return fams;
    }
};

json config_to_json(const RunConfig& c) {
    return {{"schema", kConfigSchema},
            {"data", c.data},
            {"validation", c.validation},
            {"out", c.out},
            {"has_header", c.has_header},
            {"mode", c.mode},
            {"families", c.families},
            {"tau", c.tau},
            {"seed", c.seed},
            {"jobs", c.jobs},
            {"resume", c.resume},
            {"detection_source", c.detection_source},
            {"detection_family", c.detection_family},
            {"pretrain_target", c.pretrain_target},
            {"dump_cost_history", c.dump_cost_history},
            {"optimizer", optim_settings_to_json(c.optim)},
            {"train", {{"alpha", c.alpha}, {"init_halfwidth", c.init_halfwidth}}}};
}

void config_from_json(const json& j, RunConfig& c) {
    if (j.contains("schema") && j.at("schema").get<std::string>() != kConfigSchema)
        throw std::runtime_error("config schema '" + j.at("schema").get<std::string>() + "' is not supported (expected " +
                                 kConfigSchema + ")");
    c.data = j.value("data", c.data);
    c.validation = j.value("validation", c.validation);
    c.out = j.value("out", c.out);
    c.has_header = j.value("has_header", c.has_header);
    c.mode = j.value("mode", c.mode);
    if (j.contains("families")) c.families = j.at("families").get<std::vector<std::string>>();
    c.tau = j.value("tau", c.tau);
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    c.resume = j.value("resume", c.resume);
    c.detection_source = j.value("detection_source", c.detection_source);
    c.detection_family = j.value("detection_family", c.detection_family);
    c.pretrain_target = j.value("pretrain_target", c.pretrain_target);
    c.dump_cost_history = j.value("dump_cost_history", c.dump_cost_history);
    if (j.contains("optimizer")) c.optim = optim_settings_from_json(j.at("optimizer"));
    if (j.contains("train")) {
        c.alpha = j.at("train").value("alpha", c.alpha);
        c.init_halfwidth = j.at("train").value("init_halfwidth", c.init_halfwidth);
    }
}

/// Fingerprint of everything that influences a trained cell. Detection
/// parameters (tau, source) are deliberately excluded so re-detection with a
/// new threshold can reuse a finished sweep.
std::string cell_hash(const RunConfig& c) {
    json j = {{"data", c.data},
              {"has_header", c.has_header},
              {"seed", c.seed},
              {"pretrain_target", c.pretrain_target},
              {"optimizer", optim_settings_to_json(c.optim)},
              {"train", {{"alpha", c.alpha}, {"init_halfwidth", c.init_halfwidth}}}};
    return hash_hex(j.dump());
}

std::string config_hash(const RunConfig& c) { return hash_hex(config_to_json(c).dump()); }

std::string dataset_label(const std::string& path) { return fs::path(path).stem().string(); }

void write_error_json(const std::string& out_dir, const std::string& message) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) return;
    json j = {{"error", message}, {"tool", kToolVersion}};
    try {
        save_json(j, (fs::path(out_dir) / "error.json").string());
    } catch (...) {
    }
}

struct LoadedData {
    RawTable raw;
    Dataset dataset;
};

LoadedData prepare_dataset(const RunConfig& cfg) {
    LoadedData out;
    out.raw = load_csv(cfg.data, cfg.has_header);
    const FeatureMask mask = eliminate_constant_features(out.raw);
    out.dataset = normalize(out.raw, mask);
    return out;
}

// ---------------------------------------------------------------------------
// sweep execution with a job pool and per-cell persistence

std::string cell_filename(Family fam, int m) {
    return std::string(family_tag(fam)) + "_m" + std::to_string(m) + ".json";
}

struct CellStore {
    fs::path dir;
    std::string hash;  // cell_hash of the active config
    Provenance prov;
    OptimSettings settings;
    bool resume = false;
    mutable std::mutex mu;

    std::optional<double> lookup(Family fam, int m) const {
        if (!resume) return std::nullopt;
        const fs::path p = dir / cell_filename(fam, m);
        if (!fs::exists(p)) return std::nullopt;
        try {
            const json j = load_json(p.string());
            if (j.value("schema", "") != kCellSchema) return std::nullopt;
            if (j.value("cell_hash", "") != hash) return std::nullopt;
            if (!j.value("ok", false)) return std::nullopt;
            return j.at("mrse").get<double>();
        } catch (const std::exception&) {
            return std::nullopt;  // unreadable cells are recomputed
        }
    }

    void store(const CellResult& cell) const {
        json j;
        j["schema"] = kCellSchema;
        j["cell_hash"] = hash;
        j["provenance"] = to_json(prov);
        j["family"] = family_tag(cell.family);
        j["m"] = cell.m;
        j["ok"] = cell.ok;
        if (!cell.ok) {
            j["error"] = cell.error;
        } else {
            j["mrse"] = cell.mrse;
            j["model"] = model_to_json(cell.model, settings, prov);
            const LayerChangeReport changes = weight_change_report(cell.model);
            j["weight_change"] = changes.change;
            j["stop_reason"] = stop_reason_name(cell.model.optim.stop_reason);
            j["finetune_iterations"] = cell.model.optim.iterations;
        }
        std::lock_guard<std::mutex> lock(mu);
        const fs::path p = dir / cell_filename(cell.family, cell.m);
        const fs::path tmp = p.string() + ".tmp";
        save_json(j, tmp.string());
        fs::rename(tmp, p);
    }
};

/// Runs every (family, m) cell, at most `jobs` at a time. Cell work is
/// independent and deterministic, so the assembled trajectory does not depend
/// on scheduling.
Trajectory parallel_sweep(const Dataset& dataset, const std::vector<Family>& families, const DimGrid& grid,
                          const TrainConfig& train_cfg, const OptimSettings& settings, int jobs,
                          const CellStore& store, const RunConfig& run_cfg) {
    struct Job {
        Family family;
        int m;
        std::size_t grid_index;
    };
    std::vector<Job> jobs_list;
    for (Family fam : families)
        for (std::size_t i = 0; i < grid.values.size(); ++i) jobs_list.push_back({fam, grid.values[i], i});

    const int n = dataset.features();
    const PcaBasis full_basis = pca_fit(dataset, n);
    const double N = static_cast<double>(dataset.rows());

    Trajectory traj;
    traj.grid = grid;
    traj.n = n;
    for (int m : grid.values) {
        const PcaBasis b = truncate_basis(full_basis, m);
        traj.linear_mrse.push_back(std::sqrt(residual_rows(b, dataset.data).squaredNorm()) / N);
    }
    for (Family fam : families) traj.model_mrse[fam].assign(grid.values.size(), kMissingCell);

    std::vector<double> results(jobs_list.size(), kMissingCell);
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;

    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs_list.size()) return;
            const Job& job = jobs_list[k];
            if (auto cached = store.lookup(job.family, job.m)) {
                results[k] = *cached;
                std::lock_guard<std::mutex> lock(log_mu);
                std::cout << "  [" << family_tag(job.family) << " m=" << job.m << "] resumed, mrse=" << *cached
                          << "\n";
                continue;
            }
            CellResult cell = run_cell(dataset, full_basis, job.family, job.m, train_cfg, settings);
            if (cell.ok && run_cfg.dump_cost_history) {
                const fs::path hist_dir = fs::path(run_cfg.out) / "cost_history";
                fs::create_directories(hist_dir);
                dump_cost_history(cell.model.optim,
                                  (hist_dir / (std::string(family_tag(job.family)) + "_m" +
                                               std::to_string(job.m) + ".csv"))
                                      .string());
            }
            store.store(cell);
            results[k] = cell.mrse;
            std::lock_guard<std::mutex> lock(log_mu);
            if (cell.ok)
                std::cout << "  [" << family_tag(job.family) << " m=" << job.m << "] mrse=" << cell.mrse << "\n";
            else
                std::cout << "  [" << family_tag(job.family) << " m=" << job.m << "] FAILED: " << cell.error << "\n";
        }
    };

    const int thread_count = std::max(1, std::min<int>(jobs, static_cast<int>(jobs_list.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (std::size_t k = 0; k < jobs_list.size(); ++k)
        traj.model_mrse[jobs_list[k].family][jobs_list[k].grid_index] = results[k];
    return traj;
}

int effective_jobs(const RunConfig& cfg) {
    if (cfg.jobs > 0) return cfg.jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------------------
// subcommand bodies

struct SweepArtifacts {
    Trajectory traj;
    Provenance prov;
    fs::path out_dir;
    fs::path cells_dir;
    std::string dataset_name;
};

SweepArtifacts run_sweep_command(const RunConfig& cfg) {
    if (cfg.families.empty()) throw std::runtime_error("config: families must not be empty");
    if (cfg.data.empty()) throw std::runtime_error("config: no input data given (--data or config file)");
    if (!fs::exists(cfg.data)) throw std::runtime_error("config: data file '" + cfg.data + "' does not exist");

    SweepArtifacts art;
    art.out_dir = cfg.out;
    art.cells_dir = art.out_dir / "cells";
    fs::create_directories(art.cells_dir);
    art.dataset_name = dataset_label(cfg.data);
    art.prov = Provenance{kToolVersion, config_hash(cfg), cfg.seed};

    const LoadedData loaded = prepare_dataset(cfg);
    const int n = loaded.dataset.features();
    std::cout << art.dataset_name << ": N=" << loaded.dataset.rows() << ", n=" << n << " (of "
              << loaded.raw.values.cols() << " raw features)\n";

    const DimGrid grid = make_grid(n, cfg.grid_mode());
    CellStore store;
    store.dir = art.cells_dir;
    store.hash = cell_hash(cfg);
    store.prov = art.prov;
    store.settings = cfg.optim;
    store.resume = cfg.resume;

    std::cout << "sweeping " << cfg.families.size() << " families over " << grid.values.size() << " dimensions, "
              << effective_jobs(cfg) << " jobs\n";
    art.traj = parallel_sweep(loaded.dataset, cfg.family_list(), grid, cfg.train_config(), cfg.optim,
                              effective_jobs(cfg), store, cfg);

    write_trajectory_csv(art.traj, art.dataset_name, art.prov, (art.out_dir / "trajectory.csv").string());
    write_plot_csv(art.traj, art.prov, (art.out_dir / ("plot_" + art.dataset_name + ".csv")).string());
    return art;
}

std::vector<TrainedModel> load_family_models(const fs::path& cells_dir, Family fam, const DimGrid& grid) {
    std::vector<TrainedModel> models;
    for (int m : grid.values) {
        const fs::path p = cells_dir / cell_filename(fam, m);
        if (!fs::exists(p)) continue;
        const json j = load_json(p.string());
        if (!j.value("ok", false) || !j.contains("model")) continue;
        models.push_back(model_from_json(j.at("model")));
    }
    return models;
}

int cmd_estimate(const RunConfig& cfg) {
    SweepArtifacts art = run_sweep_command(cfg);

    DetectionConfig det_cfg;
    det_cfg.tau = cfg.effective_tau();
    det_cfg.source = parse_detection_source(cfg.detection_source);
    det_cfg.family = parse_family(cfg.detection_family);
    if (det_cfg.source == DetectionSource::SingleModel && !art.traj.has(det_cfg.family))
        throw std::runtime_error("detection family " + cfg.detection_family + " was not swept");

    const DetectionResult det = detect_id(art.traj, det_cfg);
    const std::vector<double> det_series = det_cfg.source == DetectionSource::MinOverModels
                                               ? art.traj.min_series()
                                               : art.traj.series(det_cfg.family);

    json dj;
    dj["provenance"] = to_json(art.prov);
    dj["dataset"] = art.dataset_name;
    dj["n"] = art.traj.n;
    dj["N"] = [&] {
        const RawTable raw = load_csv(cfg.data, cfg.has_header);
        return raw.values.rows();
    }();
    dj["grid"] = art.traj.grid.values;
    dj["tau"] = det_cfg.tau;
    dj["source"] = detection_source_name(det_cfg.source);
    if (det_cfg.source == DetectionSource::SingleModel) dj["detection_family"] = family_tag(det_cfg.family);
    dj["detected"] = det.detected;
    if (det.detected) {
        dj["id"] = det.id;
        dj["triggering_dim"] = det.triggering_dim;
        dj["reduction_rate"] = det.reduction_rate;
        dj["mrse_at_id"] = det.mrse_at_id;
    }
    if (const auto gain_dim = max_nonlinear_gain_dim(art.traj, det_series)) dj["max_nonlinear_gain_dim"] = *gain_dim;

    json effj;
    effj["provenance"] = to_json(art.prov);
    if (det.detected && art.traj.has(Family::OneHid)) {
        json per_family = json::object();
        for (const auto& [fam, st] : efficiency_table(art.traj, det)) {
            per_family[family_tag(fam)] = {{"mean", st.mean},
                                           {"max", st.max},
                                           {"argmax_dim", st.argmax_dim},
                                           {"cells_used", st.cells_used},
                                           {"excluded_cells", st.excluded_cells}};
        }
        effj["efficiency_vs_1Hid"] = per_family;
        dj["per_family_efficiency"] = per_family;
        save_json(effj, (art.out_dir / "efficiency.json").string());
    }
    save_json(dj, (art.out_dir / "detection.json").string());

    if (det.detected) {
        const Family best_family = det_cfg.source == DetectionSource::SingleModel
                                       ? det_cfg.family
                                       : [&] {
                                             // family attaining the min at the detected dimension
                                             Family best = det_cfg.family;
                                             double best_val = std::numeric_limits<double>::infinity();
                                             std::size_t idx = 0;
                                             for (; idx < art.traj.grid.values.size(); ++idx)
                                                 if (art.traj.grid.values[idx] == det.id) break;
                                             for (const auto& [fam, series] : art.traj.model_mrse) {
                                                 if (!std::isnan(series[idx]) && series[idx] < best_val) {
                                                     best_val = series[idx];
                                                     best = fam;
                                                 }
                                             }
                                             return best;
                                         }();
        const fs::path cell_path = art.cells_dir / cell_filename(best_family, det.id);
        if (fs::exists(cell_path)) {
            const json cell = load_json(cell_path.string());
            if (cell.value("ok", false) && cell.contains("model"))
                save_json(cell.at("model"), (art.out_dir / "model_best.json").string());
        }
        std::cout << "detected ID = " << det.id << " (reduction " << det.reduction_rate << ", MRSE "
                  << det.mrse_at_id << ")\n";
    } else {
        std::cout << "no intrinsic dimension detected with tau = " << det_cfg.tau << "\n";
    }

    if (!cfg.validation.empty()) {
        const RawTable val = load_csv(cfg.validation, cfg.has_header);
        const Family fam = det_cfg.family;
        const std::vector<TrainedModel> models = load_family_models(art.cells_dir, fam, art.traj.grid);
        const GeneralizationReport rep = generalization_score(models, val);
        json gj;
        gj["provenance"] = to_json(art.prov);
        gj["family"] = family_tag(fam);
        gj["dims"] = rep.dims;
        gj["train_mrse"] = rep.train_mrse;
        gj["valid_mrse"] = rep.valid_mrse;
        if (rep.correlation)
            gj["correlation"] = *rep.correlation;
        else
            gj["degenerate"] = true;
        save_json(gj, (art.out_dir / "generalization.json").string());
        if (rep.correlation) std::cout << "train/validation MRSE correlation: " << *rep.correlation << "\n";
    }

    return det.detected ? 0 : 2;
}

int cmd_sweep(const RunConfig& cfg) {
    run_sweep_command(cfg);
    return 0;
}

int cmd_validate(const std::string& model_path, const std::string& data_path, bool has_header) {
    if (!fs::exists(model_path)) throw std::runtime_error("model path '" + model_path + "' does not exist");
    const RawTable val = load_csv(data_path, has_header);

    json report;
    report["tool"] = kToolVersion;
    report["data"] = data_path;

    if (fs::is_directory(model_path)) {
        fs::path dir = model_path;
        if (fs::is_directory(dir / "cells")) dir /= "cells";
        std::map<Family, std::vector<TrainedModel>> by_family;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() != ".json") continue;
            const json j = load_json(entry.path().string());
            if (j.value("schema", "") != kCellSchema || !j.value("ok", false) || !j.contains("model")) continue;
            TrainedModel model = model_from_json(j.at("model"));
            by_family[model.family].push_back(std::move(model));
        }
        if (by_family.empty()) throw std::runtime_error("no usable cell models under '" + model_path + "'");
        json families = json::object();
        for (auto& [fam, models] : by_family) {
            std::sort(models.begin(), models.end(),
                      [](const TrainedModel& a, const TrainedModel& b) { return a.squeeze_dim() < b.squeeze_dim(); });
            const GeneralizationReport rep = generalization_score(models, val);
            json fj;
            fj["dims"] = rep.dims;
            fj["train_mrse"] = rep.train_mrse;
            fj["valid_mrse"] = rep.valid_mrse;
            if (rep.correlation)
                fj["correlation"] = *rep.correlation;
            else
                fj["degenerate"] = true;
            families[family_tag(fam)] = fj;
            if (rep.correlation)
                std::cout << family_tag(fam) << ": correlation " << *rep.correlation << " over " << rep.dims.size()
                          << " dimensions\n";
        }
        report["families"] = families;
    } else {
        const TrainedModel model = load_model(model_path);
        const Dataset vd = apply_normalization(model.params, model.mask, val);
        const double v = reconstruction_mrse(model, vd.data);
        report["family"] = family_tag(model.family);
        report["m"] = model.squeeze_dim();
        report["train_mrse"] = model.train_mrse;
        report["valid_mrse"] = v;
        std::cout << family_tag(model.family) << " m=" << model.squeeze_dim() << ": train_mrse=" << model.train_mrse
                  << " valid_mrse=" << v << "\n";
    }

    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_check(const RunConfig& cfg) {
    Dataset data;
    if (!cfg.data.empty()) {
        LoadedData loaded = prepare_dataset(cfg);
        data = std::move(loaded.dataset);
        if (data.features() > 20) {
            // the brute-force oracle is cubic; probe the first 20 kept features
            Dataset sub;
            sub.data = data.data.leftCols(20);
            sub.data.rowwise() -= sub.data.colwise().mean();
            data = std::move(sub);
        }
    } else {
        UniformRng rng(mix_seed(cfg.seed, 101));
        Eigen::MatrixXd rows(64, 8);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = rng.next_symmetric(1.0);
        RawTable t;
        t.values = rows;
        data = normalize(t, eliminate_constant_features(t));
    }

    const auto outcomes = run_check_battery(data, cfg.seed);
    bool all_pass = true;
    std::printf("%-32s %-6s %-14s %s\n", "check", "result", "value", "threshold");
    for (const auto& oc : outcomes) {
        all_pass = all_pass && oc.pass;
        std::printf("%-32s %-6s %-14.3e %.1e\n", oc.name.c_str(), oc.pass ? "PASS" : "FAIL", oc.value, oc.threshold);
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intrinsic dimension estimation with additive autoencoders"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::string model_path;

    auto add_common = [&](CLI::App* cmd, bool wants_data) {
        cmd->add_option("--config", config_path, "JSON run configuration")->envname("ADDAE_CONFIG");
        if (wants_data) {
            cmd->add_option("--data", cfg.data, "input CSV (rows are observations)")->envname("ADDAE_DATA");
            cmd->add_flag("--has-header", cfg.has_header, "first CSV line is a header")->envname("ADDAE_HAS_HEADER");
        }
    };
    auto add_sweep_opts = [&](CLI::App* cmd) {
        cmd->add_option("--out", cfg.out, "output directory")->envname("ADDAE_OUT");
        cmd->add_option("--tau", cfg.tau, "detection threshold (default 4e-3 small, 3e-3 large)")
            ->envname("ADDAE_TAU");
        cmd->add_option("--families", cfg.families, "model families to sweep")
            ->delimiter(',')
            ->envname("ADDAE_FAMILIES");
        cmd->add_option("--mode", cfg.mode, "grid mode: small (1..n-1) or large (10..0.6n)")->envname("ADDAE_MODE");
        cmd->add_option("--seed", cfg.seed, "master random seed")->envname("ADDAE_SEED");
        cmd->add_option("--jobs", cfg.jobs, "parallel training jobs (0 = hardware threads)")->envname("ADDAE_JOBS");
        cmd->add_flag("--resume", cfg.resume, "reuse finished cells from a previous run")->envname("ADDAE_RESUME");
        cmd->add_option("--validation", cfg.validation, "held-out CSV for generalization scoring")
            ->envname("ADDAE_VALIDATION");
    };

    CLI::App* estimate = app.add_subcommand("estimate", "sweep, detect the intrinsic dimension, emit artifacts");
    add_common(estimate, true);
    add_sweep_opts(estimate);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep only: trajectory and plot data, no detection");
    add_common(sweep_cmd, true);
    add_sweep_opts(sweep_cmd);

    CLI::App* validate = app.add_subcommand("validate", "score a stored model or cell directory on held-out data");
    validate->add_option("--model", model_path, "model JSON or output/cells directory")
        ->required()
        ->envname("ADDAE_MODEL");
    validate->add_option("--data", cfg.data, "validation CSV")->required()->envname("ADDAE_DATA");
    validate->add_flag("--has-header", cfg.has_header, "first CSV line is a header")->envname("ADDAE_HAS_HEADER");

    CLI::App* check = app.add_subcommand("check", "run self-diagnostics");
    add_common(check, true);
    check->add_option("--seed", cfg.seed, "seed for the diagnostic instances")->envname("ADDAE_SEED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        // config file first, then flags/environment re-applied on top
        if (!config_path.empty()) {
            RunConfig file_cfg;
            config_from_json(load_json(config_path), file_cfg);
            // flags that the user left untouched adopt the file values
            RunConfig merged = file_cfg;
            CLI::App* active = app.get_subcommands().front();
            auto keep = [&](const char* flag) { return active->get_option_no_throw(flag) != nullptr &&
                                                        active->count(flag) > 0; };
            if (keep("--data")) merged.data = cfg.data;
            if (keep("--has-header")) merged.has_header = cfg.has_header;
            if (keep("--out")) merged.out = cfg.out;
            if (keep("--tau")) merged.tau = cfg.tau;
            if (keep("--families")) merged.families = cfg.families;
            if (keep("--mode")) merged.mode = cfg.mode;
            if (keep("--seed")) merged.seed = cfg.seed;
            if (keep("--jobs")) merged.jobs = cfg.jobs;
            if (keep("--resume")) merged.resume = cfg.resume;
            if (keep("--validation")) merged.validation = cfg.validation;
            cfg = merged;
        }

        if (estimate->parsed()) return cmd_estimate(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg);
        if (validate->parsed()) return cmd_validate(model_path, cfg.data, cfg.has_header);
        if (check->parsed()) return cmd_check(cfg);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_error_json(cfg.out, e.what());
        return 1;
    }
}
