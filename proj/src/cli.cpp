#include "flarecast/cli.hpp"

#include "flarecast/decomposition.hpp"
#include "flarecast/errors.hpp"
#include "flarecast/evaluation.hpp"
#include "flarecast/nn/model.hpp"
#include "flarecast/socstats.hpp"
#include "flarecast/windows.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#ifndef FLARECAST_VERSION
#define FLARECAST_VERSION "0.0.0"
#endif

namespace flarecast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ------------------------------------------------------------- json helpers

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool is_nonnegative_integer(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            known = known || item.key() == key;
        }
        if (!known) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) {
        return;
    }
    try {
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!it->is_number_integer()) {
                throw ConfigError(where + "." + key + ": expected an integer");
            }
            if constexpr (std::is_unsigned_v<T>) {
                if (!is_nonnegative_integer(*it)) {
                    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
                }
            }
        }
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <class F>
void read_with(const json& j, const char* key, const std::string& where, F&& convert) {
    const auto it = j.find(key);
    if (it == j.end()) {
        return;
    }
    if (!it->is_string()) {
        throw ConfigError(where + "." + key + ": expected a string");
    }
    convert(it->get<std::string>());
}

const char* to_string(preprocess::BinSpacing s) {
    return s == preprocess::BinSpacing::linear ? "linear" : "logarithmic";
}

preprocess::BinSpacing spacing_from_string(const std::string& s) {
    if (s == "linear") return preprocess::BinSpacing::linear;
    if (s == "logarithmic") return preprocess::BinSpacing::logarithmic;
    throw ConfigError("unknown bin spacing '" + s + "'");
}

void parse_columns(const json& j, catalog::ColumnSchema& c) {
    const std::string where = "columns";
    require_object(j, where);
    check_keys(j, where,
               {"event_id", "start_time", "peak_time", "end_time", "peak_flux", "class", "background_flux",
                "total_flux", "multiple_id", "delimiter"});
    read(j, "event_id", c.event_id, where);
    read(j, "start_time", c.start_time, where);
    read(j, "peak_time", c.peak_time, where);
    read(j, "end_time", c.end_time, where);
    read(j, "peak_flux", c.peak_flux, where);
    read(j, "class", c.flare_class, where);
    read(j, "background_flux", c.background_flux, where);
    read(j, "total_flux", c.total_flux, where);
    read(j, "multiple_id", c.multiple_id, where);
    read_with(j, "delimiter", where, [&](const std::string& s) {
        if (s.size() != 1) {
            throw ConfigError("columns.delimiter must be a single character");
        }
        c.delimiter = s[0];
    });
}

void parse_lstm(const json& j, models::LstmModelConfig& c) {
    const std::string where = "lstm";
    require_object(j, where);
    check_keys(j, where, {"hidden_sizes", "activations"});
    read(j, "hidden_sizes", c.hidden_sizes, where);
    if (j.contains("activations")) {
        std::vector<std::string> names;
        read(j, "activations", names, where);
        c.activations.clear();
        for (const auto& n : names) {
            c.activations.push_back(nn::activation_from_string(n));
        }
    }
}

void parse_dlstm(const json& j, models::DlstmModelConfig& c) {
    const std::string where = "dlstm";
    require_object(j, where);
    check_keys(j, where,
               {"kernel", "kernel2", "front_width", "front_activation", "hidden", "dense_width", "dense_activation"});
    read(j, "kernel", c.kernel, where);
    read(j, "kernel2", c.kernel2, where);
    read(j, "front_width", c.front_width, where);
    read(j, "hidden", c.hidden, where);
    read(j, "dense_width", c.dense_width, where);
    read_with(j, "front_activation", where,
              [&](const std::string& s) { c.front_activation = nn::activation_from_string(s); });
    read_with(j, "dense_activation", where,
              [&](const std::string& s) { c.dense_activation = nn::activation_from_string(s); });
}

void parse_train(const json& j, models::TrainConfig& c) {
    const std::string where = "train";
    require_object(j, where);
    check_keys(j, where, {"epochs", "batch_size", "optimizer", "learning_rate", "beta1", "beta2", "epsilon"});
    read(j, "epochs", c.epochs, where);
    read(j, "batch_size", c.batch_size, where);
    read_with(j, "optimizer", where, [&](const std::string& s) { c.optimizer.kind = nn::optimizer_from_string(s); });
    read(j, "learning_rate", c.optimizer.learning_rate, where);
    read(j, "beta1", c.optimizer.beta1, where);
    read(j, "beta2", c.optimizer.beta2, where);
    read(j, "epsilon", c.optimizer.epsilon, where);
}

// ------------------------------------------------------------------ logging

std::shared_ptr<spdlog::logger> make_logger() {
    // not registered globally, so repeated run() calls in one process are fine
    auto logger = std::make_shared<spdlog::logger>("flarecast", std::make_shared<spdlog::sinks::stderr_sink_st>());
    logger->set_pattern("[%l] %v");
    auto level = spdlog::level::info;
    if (const char* env = std::getenv("FLARECAST_LOG")) {
        const std::string name(env);
        level = spdlog::level::from_str(name);
        if (level == spdlog::level::off && name != "off") {
            logger->warn("FLARECAST_LOG='{}' is not a level name; using info", name);
            level = spdlog::level::info;
        }
    }
    logger->set_level(level);
    return logger;
}

// ---------------------------------------------------------------- file I/O

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    const fs::path& root() const { return root_; }

    void write(const fs::path& relative, const std::string& content) {
        const auto path = root_ / relative;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) {
            throw Error("failed to write " + path.string());
        }
        written_.emplace(relative.generic_string(), nn::fnv1a64(content));
    }

    void write_json(const fs::path& relative, const json& j) { write(relative, j.dump(2) + "\n"); }

    template <class F>
    void write_with(const fs::path& relative, F&& emit) {
        std::ostringstream s;
        emit(s);
        write(relative, s.str());
    }

    json listing() const {
        json files = json::array();
        for (const auto& [path, hash] : written_) {
            files.push_back({{"path", path}, {"fnv1a64", hex64(hash)}});
        }
        return files;
    }

private:
    fs::path root_;
    std::map<std::string, std::uint64_t> written_;
};

// ---------------------------------------------------------------- pipeline

struct LoadedCatalog {
    catalog::ParseResult parsed;
    std::uint64_t content_hash = 0;
};

LoadedCatalog load_catalog(const RunConfig& cfg) {
    if (cfg.catalog.empty()) {
        throw ConfigError("no catalog given; set \"catalog\" in the config or pass --catalog");
    }
    const std::string text = read_file(cfg.catalog);
    std::istringstream in(text);
    LoadedCatalog out;
    out.parsed = catalog::parse_catalog(in, cfg.columns);
    out.content_hash = nn::fnv1a64(text);
    return out;
}

catalog::FlareCatalog pipeline_catalog(const RunConfig& cfg, const catalog::FlareCatalog& raw) {
    return cfg.smoothing ? preprocess::smooth_fluxes(raw, cfg.smoothing_config) : raw;
}

windows::WindowSet build_dataset(const RunConfig& cfg, const catalog::FlareCatalog& cat, windows::SeriesMode mode) {
    if (mode == windows::SeriesMode::irregular) {
        return windows::build_windows(preprocess::build_irregular_series(cat), cfg.window);
    }
    return windows::build_windows(preprocess::regularize(cat, cfg.regularize), cfg.window);
}

json library_versions() {
    return {{"flarecast", FLARECAST_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

json normalization_json(const std::vector<preprocess::MinMaxParams>& params) {
    json out = json::array();
    for (const auto& p : params) {
        out.push_back({{"feature", p.feature}, {"min", p.observed_min}, {"max", p.observed_max}});
    }
    return out;
}

std::vector<preprocess::MinMaxParams> normalization_from_json(const json& j) {
    std::vector<preprocess::MinMaxParams> out;
    for (const auto& p : j) {
        out.push_back({p.at("feature").get<std::string>(), p.at("min").get<double>(), p.at("max").get<double>()});
    }
    return out;
}

// ---------------------------------------------------------------- commands

struct Common {
    std::string config;
    std::string catalog;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out;
};

RunConfig resolve(const Common& opts) {
    RunConfig cfg = opts.config.empty() ? RunConfig{} : load_run_config(opts.config);
    if (!opts.catalog.empty()) {
        cfg.catalog = opts.catalog;
    }
    if (opts.seed) {
        cfg.experiment.seeds = {*opts.seed};
    }
    if (opts.jobs) {
        cfg.experiment.ensemble.jobs = *opts.jobs;
    }
    if (!opts.out.empty()) {
        cfg.out = opts.out;
    }
    cfg.validate();
    return cfg;
}

void cmd_ingest(const RunConfig& cfg, spdlog::logger& log) {
    const auto loaded = load_catalog(cfg);
    const auto& parsed = loaded.parsed;
    const auto summary = catalog::summarize(parsed.catalog);
    OutputDir out(cfg.out);
    json report = {{"events", parsed.catalog.size()},
                   {"rejected", parsed.rejections.size()},
                   {"summary", catalog::to_json(summary)}};
    out.write_json("ingest_summary.json", report);
    out.write_json("rejections.json", catalog::to_json(parsed.rejections));
    out.write_with("catalog.csv", [&](std::ostream& s) { catalog::write_catalog(s, parsed.catalog); });
    log.info("ingested {} events, rejected {} rows", parsed.catalog.size(), parsed.rejections.size());
    std::cout << report.dump(2) << '\n';
}

void cmd_stats(const RunConfig& cfg, int bins, spdlog::logger& log) {
    const auto loaded = load_catalog(cfg);
    const auto summary = catalog::summarize(loaded.parsed.catalog);
    OutputDir out(cfg.out);
    out.write_json("catalog_summary.json", catalog::to_json(summary));
    out.write_with("daily_counts.txt", [&](std::ostream& s) {
        s << "# flares_per_day days\n";
        for (const auto& [count, days] : summary.daily_count_histogram) {
            s << count << ' ' << days << '\n';
        }
    });

    const auto ws = build_dataset(cfg, pipeline_catalog(cfg, loaded.parsed.catalog), windows::SeriesMode::irregular);
    if (ws.empty()) {
        log.warn("catalog too short for windows of length {}; skipping window extrema", cfg.window);
        return;
    }
    const auto pdfs = socstats::window_extrema_pdfs(ws, bins);
    out.write_with("window_min_pdf.txt", [&](std::ostream& s) { socstats::write_histogram(s, pdfs.minimum.histogram); });
    out.write_with("window_max_pdf.txt", [&](std::ostream& s) { socstats::write_histogram(s, pdfs.maximum.histogram); });
    out.write_json("power_law_fits.json", socstats::to_json(pdfs));
    for (const auto* d : {&pdfs.minimum, &pdfs.maximum}) {
        const char* which = d == &pdfs.minimum ? "minimum" : "maximum";
        if (d->fit) {
            log.info("window {}: alpha={:.3f} f_th={:.3e} ks={:.4f} n_tail={}", which, d->fit->alpha, d->fit->f_th,
                     d->fit->ks_distance, d->fit->n_tail);
        } else {
            log.warn("window {}: no power-law fit ({})", which, d->fit_error);
        }
    }
}

void cmd_preprocess(const RunConfig& cfg, spdlog::logger& log) {
    const auto loaded = load_catalog(cfg);
    const auto cat = pipeline_catalog(cfg, loaded.parsed.catalog);
    const auto irregular = preprocess::build_irregular_series(cat);
    const auto regular = preprocess::regularize(cat, cfg.regularize);
    OutputDir out(cfg.out);
    out.write_with("irregular_series.txt", [&](std::ostream& s) { preprocess::write_irregular(s, irregular); });
    out.write_with("regular_series.txt", [&](std::ostream& s) { preprocess::write_regular(s, regular); });
    std::size_t slots = 0;
    for (const auto& run : regular.runs) {
        slots += run.size();
    }
    out.write_json("preprocess.json", {{"irregular_entries", irregular.entries.size()},
                                       {"regular_runs", regular.runs.size()},
                                       {"regular_slots", slots},
                                       {"interval_hours", regular.interval_hours}});
    log.info("irregular series: {} entries; regular series: {} slots in {} runs", irregular.entries.size(), slots,
             regular.runs.size());
}

void cmd_windows(const RunConfig& cfg, const std::string& series, int decompose, spdlog::logger& log) {
    const auto mode = series.empty() ? models::series_of(cfg.experiment.mode) : windows::series_mode_from_string(series);
    const auto loaded = load_catalog(cfg);
    const auto ws = build_dataset(cfg, pipeline_catalog(cfg, loaded.parsed.catalog), mode);
    OutputDir out(cfg.out);
    const std::string name = std::string("windows_") + windows::to_string(mode) + ".txt";
    out.write_with(name, [&](std::ostream& s) { windows::write_windows(s, ws); });
    const auto counts = windows::partition_binary(ws);
    log.info("{} windows ({} small, {} large)", ws.size(), counts.small, counts.large);

    const int kernel = cfg.experiment.dlstm.kernel;
    const int kernel2 = cfg.experiment.dlstm.kernel2;
    for (int i = 0; i < decompose && static_cast<std::size_t>(i) < ws.size(); ++i) {
        std::vector<double> x(static_cast<std::size_t>(ws.w));
        for (int t = 0; t < ws.w; ++t) {
            x[static_cast<std::size_t>(t)] = ws.feature(static_cast<std::size_t>(i), t, 0);
        }
        auto d = decomposition::decompose(x, kernel);
        if (kernel2 > 0) {
            d = decomposition::second_pass_noise(d, kernel2);
        }
        out.write_with("decomposition_" + std::to_string(i) + ".txt",
                       [&](std::ostream& s) { decomposition::write_decomposition(s, d); });
    }
}

struct SplitData {
    models::PreparedData data;
    std::uint64_t seed = 0;
    int R = 0;
};

SplitData prepared_split(const RunConfig& cfg, spdlog::logger& log) {
    const auto loaded = load_catalog(cfg);
    const auto exp = cfg.experiment_for(cfg.R.front());
    if (cfg.R.size() > 1) {
        log.warn("R grid has {} values; train/evaluate use the first, R={}", cfg.R.size(), cfg.R.front());
    }
    const auto ws = build_dataset(cfg, pipeline_catalog(cfg, loaded.parsed.catalog), models::series_of(exp.mode));
    auto [train_set, test_set] = windows::chronological_split(ws, exp.train_fraction, exp.purge);
    SplitData out;
    out.seed = exp.seeds.front();
    out.R = exp.R;
    out.data = models::prepare_data(exp, std::move(train_set), std::move(test_set), out.seed);
    return out;
}

void cmd_train(const RunConfig& cfg, spdlog::logger& log) {
    auto split = prepared_split(cfg, log);
    const auto exp = cfg.experiment_for(split.R);
    const auto spec = models::model_spec(exp, split.data.train.d);
    auto tc = exp.train;
    tc.seed = split.seed;
    const auto counts = windows::partition_binary(split.data.train);
    log.info("training {} on {} windows ({} large after R={}), seed {}", models::to_string(exp.mode),
             split.data.train.size(), counts.large, split.R, split.seed);

    std::vector<models::TrainedModel> members;
    if (models::is_ensemble(exp.mode)) {
        auto ec = exp.ensemble;
        ec.seed = split.seed;
        members = models::train_bagged(spec, split.data.train, tc, ec).members;
    } else {
        members.push_back(models::train(spec, split.data.train, tc));
    }

    OutputDir out(fs::path(cfg.out) / "model");
    json manifest = {{"mode", models::to_string(exp.mode)},
                     {"R", split.R},
                     {"seed", split.seed},
                     {"experiment_hash", hex64(nn::fnv1a64(exp.describe()))},
                     {"spec", spec.describe()},
                     {"input_size", spec.input_size},
                     {"train_small", counts.small},
                     {"train_large", counts.large},
                     {"normalization", normalization_json(split.data.normalization)}};
    json member_list = json::array();
    for (std::size_t m = 0; m < members.size(); ++m) {
        const std::string file = "member" + std::to_string(m) + ".ckpt";
        out.write_with(file, [&](std::ostream& s) { nn::save_checkpoint(s, *members[m].model, members[m].config_hash); });
        member_list.push_back({{"checkpoint", file},
                               {"config_hash", hex64(members[m].config_hash)},
                               {"loss_history", members[m].loss_history}});
    }
    manifest["members"] = member_list;
    out.write_json("model.json", manifest);
}

void cmd_evaluate(const RunConfig& cfg, const std::string& model_dir, spdlog::logger& log) {
    const fs::path dir = model_dir.empty() ? fs::path(cfg.out) / "model" : fs::path(model_dir);
    json manifest;
    try {
        manifest = json::parse(read_file(dir / "model.json"));
    } catch (const json::exception& e) {
        throw ConfigError("unreadable model manifest: " + std::string(e.what()));
    }
    const int R = cfg.R.front();
    const auto exp = cfg.experiment_for(R);
    if (manifest.at("experiment_hash").get<std::string>() != hex64(nn::fnv1a64(exp.describe()))) {
        throw ConfigError("model in " + dir.string() + " was trained under a different configuration");
    }

    const auto loaded = load_catalog(cfg);
    const auto ws = build_dataset(cfg, pipeline_catalog(cfg, loaded.parsed.catalog), models::series_of(exp.mode));
    auto test_set = windows::chronological_split(ws, exp.train_fraction, exp.purge).second;
    if (test_set.empty()) {
        throw InsufficientDataError("the split leaves no test windows");
    }
    test_set = windows::apply_normalization(test_set, normalization_from_json(manifest.at("normalization")));

    const auto spec = models::model_spec(exp, manifest.at("input_size").get<int>());
    std::vector<double> mean(test_set.size(), 0.0);
    const auto& members = manifest.at("members");
    for (const auto& member : members) {
        auto model = models::make_model(spec, 0);
        const std::string text = read_file(dir / member.at("checkpoint").get<std::string>());
        std::istringstream in(text);
        nn::load_checkpoint(in, *model);
        const auto p = models::predict_proba(*model, test_set);
        for (std::size_t i = 0; i < p.size(); ++i) {
            mean[i] += p[i] / static_cast<double>(members.size());
        }
    }

    models::SeedRun run;
    run.seed = manifest.at("seed").get<std::uint64_t>();
    models::score_predictions(run, test_set, std::move(mean), exp.threshold);
    OutputDir out(cfg.out);
    out.write_json("evaluation.json", {{"mode", models::to_string(exp.mode)},
                                       {"R", R},
                                       {"seed", run.seed},
                                       {"test_small", run.test_counts.small},
                                       {"test_large", run.test_counts.large},
                                       {"confusion", evaluation::to_json(run.confusion)},
                                       {"metrics", evaluation::to_json(run.metrics)}});
    if (run.roc) {
        out.write_with("roc.txt", [&](std::ostream& s) { evaluation::write_roc(s, *run.roc); });
    }
    const auto& tss = run.metrics[evaluation::MetricId::tss];
    log.info("test windows {}: TSS {}", test_set.size(), tss ? std::to_string(*tss) : std::string("undefined"));
}

void cmd_run(const RunConfig& cfg, spdlog::logger& log) {
    const auto loaded = load_catalog(cfg);
    const auto cat = pipeline_catalog(cfg, loaded.parsed.catalog);
    const auto mode = models::series_of(cfg.experiment.mode);
    const auto ws = build_dataset(cfg, cat, mode);
    log.info("{} {} windows from {} events", ws.size(), windows::to_string(mode), loaded.parsed.catalog.size());

    OutputDir out(cfg.out);
    json rows = json::array();
    json experiments = json::array();
    for (int r : cfg.R) {
        const auto exp = cfg.experiment_for(r);
        log.info("running {} with R={} over {} seed(s){}", models::to_string(exp.mode), r, exp.seeds.size(),
                 cfg.cross_validation ? " (walk-forward)" : "");
        const auto result =
            cfg.cross_validation ? models::run_cross_validation(exp, ws, cfg.folds) : models::run_experiment(exp, ws);
        rows.push_back(models::to_json(result));
        experiments.push_back({{"R", r}, {"config_hash", hex64(result.config_hash)}});

        const std::string prefix = "R" + std::to_string(r);
        for (std::size_t k = 0; k < result.runs.size(); ++k) {
            const auto& run = result.runs[k];
            const std::string tag =
                cfg.cross_validation ? "fold" + std::to_string(k + 1) : "seed" + std::to_string(run.seed);
            if (run.roc) {
                out.write_with("roc_" + prefix + "_" + tag + ".txt",
                               [&](std::ostream& s) { evaluation::write_roc(s, *run.roc); });
            }
            for (std::size_t m = 0; m < run.models.size(); ++m) {
                const auto& model = run.models[m];
                out.write_with(fs::path("checkpoints") / prefix / tag / ("member" + std::to_string(m) + ".ckpt"),
                               [&](std::ostream& s) { nn::save_checkpoint(s, *model.model, model.config_hash); });
            }
        }
        const auto& tss = result.report[evaluation::MetricId::tss];
        if (tss.mean) {
            log.info("R={}: TSS {:.3f} +- {:.3f}", r, *tss.mean, tss.std.value_or(0.0));
        }
    }
    out.write_json("report.json", {{"cross_validation", cfg.cross_validation}, {"rows", rows}});

    json manifest = {{"manifest_version", 1},
                     {"versions", library_versions()},
                     {"config", to_json(cfg)},
                     {"experiments", experiments},
                     {"seeds", cfg.experiment.seeds},
                     {"catalog",
                      {{"path", cfg.catalog},
                       {"fnv1a64", hex64(loaded.content_hash)},
                       {"events", loaded.parsed.catalog.size()},
                       {"rejected", loaded.parsed.rejections.size()}}},
                     {"windows", ws.size()},
                     {"outputs", out.listing()}};
    out.write_json("manifest.json", manifest);
}

} // namespace

// --------------------------------------------------------------- RunConfig

void RunConfig::validate() const {
    if (window < 1) {
        throw ConfigError("window length must be >= 1");
    }
    if (R.empty()) {
        throw ConfigError("R needs at least one value");
    }
    if (folds < 2) {
        throw ConfigError("walk-forward validation needs at least 2 folds");
    }
    if (out.empty()) {
        throw ConfigError("output directory must not be empty");
    }
    smoothing_config.validate();
    regularize.validate();
    // both architectures are checked so a bad kernel fails regardless of mode
    experiment.lstm.validate();
    experiment.dlstm.validate();
    experiment.ensemble.validate();
    for (int r : R) {
        experiment_for(r).validate();
    }
}

models::ExperimentConfig RunConfig::experiment_for(int r) const {
    auto exp = experiment;
    exp.R = r;
    return exp;
}

RunConfig parse_run_config(const json& j) {
    const std::string where = "config";
    require_object(j, where);
    check_keys(j, where,
               {"catalog", "columns", "smoothing", "regularize", "window", "mode", "R", "seeds", "train_fraction",
                "purge", "threshold", "cross_validation", "folds", "lstm", "dlstm", "train", "ensemble", "jobs",
                "out"});
    RunConfig c;
    auto& e = c.experiment;
    read(j, "catalog", c.catalog, where);
    if (j.contains("columns")) {
        parse_columns(j["columns"], c.columns);
    }
    if (j.contains("smoothing")) {
        const auto& s = j["smoothing"];
        require_object(s, "smoothing");
        check_keys(s, "smoothing", {"enabled", "n_bins", "spacing", "flux_min", "flux_max"});
        read(s, "enabled", c.smoothing, "smoothing");
        read(s, "n_bins", c.smoothing_config.n_bins, "smoothing");
        read_with(s, "spacing", "smoothing",
                  [&](const std::string& v) { c.smoothing_config.spacing = spacing_from_string(v); });
        read(s, "flux_min", c.smoothing_config.flux_min, "smoothing");
        read(s, "flux_max", c.smoothing_config.flux_max, "smoothing");
    }
    if (j.contains("regularize")) {
        const auto& r = j["regularize"];
        require_object(r, "regularize");
        check_keys(r, "regularize", {"interval_hours", "boundary_gap_hours", "break_gap_hours", "floor_flux"});
        read(r, "interval_hours", c.regularize.interval_hours, "regularize");
        read(r, "boundary_gap_hours", c.regularize.boundary_gap_hours, "regularize");
        read(r, "break_gap_hours", c.regularize.break_gap_hours, "regularize");
        read(r, "floor_flux", c.regularize.floor_flux, "regularize");
    }
    read(j, "window", c.window, where);
    read_with(j, "mode", where, [&](const std::string& s) { e.mode = models::experiment_mode_from_string(s); });
    if (j.contains("R")) {
        const auto& r = j["R"];
        if (r.is_number_integer()) {
            c.R = {r.get<int>()};
        } else if (r.is_array() && std::all_of(r.begin(), r.end(), [](const json& v) { return v.is_number_integer(); })) {
            c.R = r.get<std::vector<int>>();
        } else {
            throw ConfigError("config.R: expected an integer or a list of integers");
        }
    }
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        if (!s.is_array() || !std::all_of(s.begin(), s.end(), is_nonnegative_integer)) {
            throw ConfigError("config.seeds: expected a list of nonnegative integers");
        }
        e.seeds = s.get<std::vector<std::uint64_t>>();
    }
    read(j, "train_fraction", e.train_fraction, where);
    read(j, "purge", e.purge, where);
    read(j, "threshold", e.threshold, where);
    read(j, "cross_validation", c.cross_validation, where);
    read(j, "folds", c.folds, where);
    if (j.contains("lstm")) {
        parse_lstm(j["lstm"], e.lstm);
    }
    if (j.contains("dlstm")) {
        parse_dlstm(j["dlstm"], e.dlstm);
    }
    if (j.contains("train")) {
        parse_train(j["train"], e.train);
    }
    if (j.contains("ensemble")) {
        const auto& en = j["ensemble"];
        require_object(en, "ensemble");
        check_keys(en, "ensemble", {"members", "bootstrap_fraction"});
        read(en, "members", e.ensemble.members, "ensemble");
        read(en, "bootstrap_fraction", e.ensemble.bootstrap_fraction, "ensemble");
    }
    read(j, "jobs", e.ensemble.jobs, where);
    read(j, "out", c.out, where);
    return c;
}

json to_json(const RunConfig& c) {
    const auto& e = c.experiment;
    std::vector<std::string> activations;
    for (auto a : e.lstm.activations) {
        activations.emplace_back(nn::to_string(a));
    }
    return {
        {"catalog", c.catalog},
        {"columns",
         {{"event_id", c.columns.event_id},
          {"start_time", c.columns.start_time},
          {"peak_time", c.columns.peak_time},
          {"end_time", c.columns.end_time},
          {"peak_flux", c.columns.peak_flux},
          {"class", c.columns.flare_class},
          {"background_flux", c.columns.background_flux},
          {"total_flux", c.columns.total_flux},
          {"multiple_id", c.columns.multiple_id},
          {"delimiter", std::string(1, c.columns.delimiter)}}},
        {"smoothing",
         {{"enabled", c.smoothing},
          {"n_bins", c.smoothing_config.n_bins},
          {"spacing", to_string(c.smoothing_config.spacing)},
          {"flux_min", c.smoothing_config.flux_min},
          {"flux_max", c.smoothing_config.flux_max}}},
        {"regularize",
         {{"interval_hours", c.regularize.interval_hours},
          {"boundary_gap_hours", c.regularize.boundary_gap_hours},
          {"break_gap_hours", c.regularize.break_gap_hours},
          {"floor_flux", c.regularize.floor_flux}}},
        {"window", c.window},
        {"mode", models::to_string(e.mode)},
        {"R", c.R},
        {"seeds", e.seeds},
        {"train_fraction", e.train_fraction},
        {"purge", e.purge},
        {"threshold", e.threshold},
        {"cross_validation", c.cross_validation},
        {"folds", c.folds},
        {"lstm", {{"hidden_sizes", e.lstm.hidden_sizes}, {"activations", activations}}},
        {"dlstm",
         {{"kernel", e.dlstm.kernel},
          {"kernel2", e.dlstm.kernel2},
          {"front_width", e.dlstm.front_width},
          {"front_activation", nn::to_string(e.dlstm.front_activation)},
          {"hidden", e.dlstm.hidden},
          {"dense_width", e.dlstm.dense_width},
          {"dense_activation", nn::to_string(e.dlstm.dense_activation)}}},
        {"train",
         {{"epochs", e.train.epochs},
          {"batch_size", e.train.batch_size},
          {"optimizer", nn::to_string(e.train.optimizer.kind)},
          {"learning_rate", e.train.optimizer.learning_rate},
          {"beta1", e.train.optimizer.beta1},
          {"beta2", e.train.optimizer.beta2},
          {"epsilon", e.train.optimizer.epsilon}}},
        {"ensemble", {{"members", e.ensemble.members}, {"bootstrap_fraction", e.ensemble.bootstrap_fraction}}},
        {"jobs", e.ensemble.jobs},
        {"out", c.out},
    };
}

RunConfig load_run_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (j.is_object() && j.contains("manifest_version")) {
        return parse_run_config(j.at("config"));
    }
    return parse_run_config(j);
}

// --------------------------------------------------------------- entry

int run(int argc, const char* const* argv) {
    auto log = make_logger();
    CLI::App app{"Solar flare forecasting pipeline"};
    app.set_version_flag("--version", FLARECAST_VERSION);
    app.require_subcommand(1);

    Common opts;
    auto add_common = [&](CLI::App* sub, bool with_catalog) {
        sub->add_option("--config", opts.config, "JSON run configuration (or a run manifest)");
        if (with_catalog) {
            sub->add_option("--catalog", opts.catalog, "flare catalog CSV; overrides the config");
        }
        sub->add_option("--seed", opts.seed, "run a single seed");
        sub->add_option("--jobs", opts.jobs, "ensemble members trained concurrently")->check(CLI::PositiveNumber);
        sub->add_option("--out", opts.out, "output directory");
    };

    auto* ingest = app.add_subcommand("ingest", "parse a catalog; write its summary and rejected rows");
    add_common(ingest, true);
    int bins = 40;
    auto* stats = app.add_subcommand("stats", "daily-count histogram and window extrema power-law fits");
    add_common(stats, true);
    stats->add_option("--bins", bins, "logarithmic histogram bins")->check(CLI::PositiveNumber);
    auto* pre = app.add_subcommand("preprocess", "write the irregular and regularized series");
    add_common(pre, true);
    std::string series;
    int decompose = 0;
    auto* win = app.add_subcommand("windows", "write sliding windows (and optional decompositions)");
    add_common(win, true);
    win->add_option("--series", series, "irregular or regular; defaults to the mode's series")
        ->check(CLI::IsMember({"irregular", "regular"}));
    win->add_option("--decompose", decompose, "dump the decomposition of the first N windows")
        ->check(CLI::NonNegativeNumber);
    auto* trn = app.add_subcommand("train", "train the configured model on the train split of the first seed");
    add_common(trn, true);
    std::string model_dir;
    auto* eval = app.add_subcommand("evaluate", "score a trained model on the test split");
    add_common(eval, true);
    eval->add_option("--model", model_dir, "model directory written by train (default <out>/model)");
    auto* full = app.add_subcommand("run", "full experiment over the configured seeds and R grid");
    add_common(full, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        const RunConfig cfg = resolve(opts);
        if (app.got_subcommand(ingest)) {
            cmd_ingest(cfg, *log);
        } else if (app.got_subcommand(stats)) {
            cmd_stats(cfg, bins, *log);
        } else if (app.got_subcommand(pre)) {
            cmd_preprocess(cfg, *log);
        } else if (app.got_subcommand(win)) {
            cmd_windows(cfg, series, decompose, *log);
        } else if (app.got_subcommand(trn)) {
            cmd_train(cfg, *log);
        } else if (app.got_subcommand(eval)) {
            cmd_evaluate(cfg, model_dir, *log);
        } else if (app.got_subcommand(full)) {
            cmd_run(cfg, *log);
        }
        return kOk;
    } catch (const SchemaError& e) {
        log->error("schema error (column '{}'): {}", e.column(), e.what());
        return kSchemaError;
    } catch (const EmptyCatalogError& e) {
        log->error("empty catalog: {}", e.what());
        return kEmptyCatalog;
    } catch (const TrainingAborted& e) {
        log->error("training aborted at epoch {} batch {} (max |grad| {}): {}", e.epoch(), e.batch(), e.max_abs_grad(),
                   e.what());
        return kTrainingAborted;
    } catch (const InsufficientDataError& e) {
        log->error("insufficient data: {}", e.what());
        return kInsufficientData;
    } catch (const ConfigError& e) {
        log->error("configuration error: {}", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        log->error("{}", e.what());
        return kConfigError;
    }
}

} // namespace flarecast::cli
