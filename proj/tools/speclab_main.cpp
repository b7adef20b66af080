// speclab command-line tool: dataset generation, training, frequency-band
// analysis, anomaly scoring, and multi-run reporting. Every command writes
// its artifacts plus a manifest.json into the output directory; all data
// files are byte-stable across reruns with the same arguments.

#include <CLI11.hpp>

#include "speclab/speclab.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace speclab;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

/// One manifest per output directory: the command, its resolved settings,
/// and a timestamp (the timestamp is informational and excluded from any
/// reproducibility comparison).
void write_manifest(const fs::path& out_dir, const std::string& command, json settings) {
    json m;
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    m["settings"] = std::move(settings);
    m["output_dir"] = out_dir.string();
    m["generated_utc"] = utc_now();
    write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

json load_json_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::string model_label(const ModelConfig& cfg) {
    std::string s = model_kind_name(cfg.kind);
    if (cfg.precursor != Precursor::none) s += std::string("+") + precursor_name(cfg.precursor);
    return s;
}

// --- train config file ------------------------------------------------------
//
// JSON with two sections:
//   "model":    either a full architecture description (see ModelConfig) or a
//               preset: {"preset": "window" | "benchmark-mlp", "kind": ...,
//               "precursor": ..., "latent_dim": ..., "fourier_m": ...,
//               "sigma_f": ..., "hidden": ...}
//   "training": {"optimizer", "lr", "beta1", "beta2", "epochs", "batch_size",
//                "seed", "checkpoint_every", "runs", "kl_warmup", "beta_kl"}
// The window preset takes channel count and window length from the data file.

ModelConfig resolve_model_config(const json& j, std::size_t data_channels,
                                 std::size_t data_time_steps) {
    if (!j.contains("model")) throw ValidationError("config: missing required key 'model'");
    const json& mj = j.at("model");
    if (mj.contains("preset")) {
        const std::string preset = mj.at("preset").get<std::string>();
        const Precursor pre = precursor_from_name(mj.value("precursor", "none"));
        const auto m = mj.value("fourier_m", std::size_t{32});
        const double sigma_f = mj.value("sigma_f", 1.0);
        if (preset == "benchmark-mlp")
            return benchmark_mlp_config(pre, m, sigma_f, mj.value("hidden", std::size_t{256}));
        if (preset == "window") {
            const ModelKind kind = model_kind_from_name(mj.value("kind", "ae"));
            if (kind != ModelKind::vae && kind != ModelKind::ae)
                throw ValidationError("config: the window preset needs kind 'ae' or 'vae'");
            if (!mj.contains("latent_dim"))
                throw ValidationError("model config: missing required key 'latent_dim'");
            ModelConfig cfg = default_window_config(kind, pre, data_channels, data_time_steps,
                                                    mj.at("latent_dim").get<std::size_t>(), m,
                                                    sigma_f);
            cfg.beta_kl = mj.value("beta_kl", 1.0);
            cfg.duplicate_input = mj.value("duplicate_input", false);
            return cfg;
        }
        throw ValidationError("config: unknown preset '" + preset + "'");
    }
    ModelConfig cfg = ModelConfig::from_json(mj);
    if (cfg.kind != ModelKind::mlp &&
        (cfg.input_channels != data_channels || cfg.time_steps != data_time_steps))
        throw ValidationError("config: model expects [" + std::to_string(cfg.input_channels) +
                              ", " + std::to_string(cfg.time_steps) + "] windows but the data is [" +
                              std::to_string(data_channels) + ", " +
                              std::to_string(data_time_steps) + "]");
    return cfg;
}

TrainConfig resolve_train_config(const json& j) {
    TrainConfig t;
    if (!j.contains("training")) return t;
    const json& tj = j.at("training");
    const std::string opt = tj.value("optimizer", "adam");
    if (opt == "adam")
        t.optimizer = OptimizerKind::adam;
    else if (opt == "sgd")
        t.optimizer = OptimizerKind::sgd;
    else
        throw ValidationError("training.optimizer: unknown optimizer '" + opt + "'");
    t.lr = tj.value("lr", t.lr);
    t.beta1 = tj.value("beta1", t.beta1);
    t.beta2 = tj.value("beta2", t.beta2);
    t.batch_size = tj.value("batch_size", t.batch_size);
    t.epochs = tj.value("epochs", t.epochs);
    t.seed = tj.value("seed", t.seed);
    t.checkpoint_every = tj.value("checkpoint_every", t.checkpoint_every);
    t.runs = tj.value("runs", t.runs);
    t.kl_warmup = tj.value("kl_warmup", t.kl_warmup);
    return t;
}

json train_config_to_json(const TrainConfig& t) {
    json j;
    j["optimizer"] = t.optimizer == OptimizerKind::adam ? "adam" : "sgd";
    j["lr"] = t.lr;
    j["beta1"] = t.beta1;
    j["beta2"] = t.beta2;
    j["batch_size"] = t.batch_size;
    j["epochs"] = t.epochs;
    j["seed"] = t.seed;
    j["checkpoint_every"] = t.checkpoint_every;
    j["runs"] = t.runs;
    j["kl_warmup"] = t.kl_warmup;
    return j;
}

std::string checkpoint_filename(std::size_t epoch) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "checkpoint_%06zu.bin", epoch);
    return buf;
}

void write_loss_csv(const std::vector<double>& curve, const fs::path& path) {
    std::string text = "epoch,loss\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        text += std::to_string(i + 1) + "," + format_double(curve[i]) + "\n";
    write_text(path, text);
}

std::vector<Checkpoint> load_checkpoint_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("checkpoint_", 0) == 0 && entry.path().extension() == ".bin")
            paths.push_back(entry.path());
    }
    if (paths.empty()) throw IoError("no checkpoint_*.bin files in '" + dir + "'");
    std::sort(paths.begin(), paths.end());
    std::vector<Checkpoint> cps;
    for (const auto& p : paths) cps.push_back(load_checkpoint(p.string()));
    return cps;
}

json metrics_to_json(const Metrics& m, const std::string& model_name,
                     const std::string& policy, double threshold) {
    json j;
    j["model"] = model_name;
    j["threshold_policy"] = policy;
    j["threshold"] = threshold;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["precision_defined"] = m.precision_defined;
    j["recall_defined"] = m.recall_defined;
    return j;
}

// --- commands ----------------------------------------------------------------

struct GenDataArgs {
    std::string kind, out = ".";
    std::uint64_t seed = 1;
    std::size_t n = 256, n_nominal = 100, n_anomaly = 0, channels = 10, window = 160;
};

int cmd_gen_data(const GenDataArgs& a) {
    fs::create_directories(a.out);
    json settings;
    settings["kind"] = a.kind;
    settings["seed"] = a.seed;
    if (a.kind == "step" || a.kind == "sines") {
        const Dataset1D d = a.kind == "step" ? gen_step(a.n, a.seed) : gen_sines(a.n);
        save_dataset1d(d, (fs::path(a.out) / "data.csv").string());
        settings["n"] = a.n;
    } else if (a.kind == "flights") {
        const WindowedSeriesSet set =
            gen_synthetic_flights(a.n_nominal, a.n_anomaly, a.channels, a.window, a.seed);
        save_windows(set, (fs::path(a.out) / "windows.csv").string());
        settings["n_nominal"] = a.n_nominal;
        settings["n_anomaly"] = a.n_anomaly;
        settings["channels"] = a.channels;
        settings["window"] = a.window;
    } else {
        throw ValidationError("gen-data: unknown kind '" + a.kind +
                              "' (expected step, sines, or flights)");
    }
    write_manifest(a.out, "gen-data", settings);
    return 0;
}

struct TrainArgs {
    std::string config, data, out = ".";
    std::int64_t seed = -1, epochs = -1, runs = -1;
    double lr = -1.0;
};

int cmd_train(const TrainArgs& a) {
    const json cfg_json = load_json_file(a.config);
    TrainConfig tcfg = resolve_train_config(cfg_json);
    if (a.seed >= 0) tcfg.seed = static_cast<std::uint64_t>(a.seed);
    if (a.epochs >= 0) tcfg.epochs = static_cast<std::size_t>(a.epochs);
    if (a.runs >= 0) tcfg.runs = static_cast<std::size_t>(a.runs);
    if (a.lr > 0.0) tcfg.lr = a.lr;
    tcfg.validate();

    // Probe the model section first to know which data format to load.
    if (!cfg_json.contains("model"))
        throw ValidationError("config: missing required key 'model'");
    const bool is_mlp = cfg_json.at("model").value("preset", "") == "benchmark-mlp" ||
                        cfg_json.at("model").value("kind", "") == "mlp";

    std::vector<Sample> samples;
    std::size_t d = 1, t = 1;
    if (is_mlp) {
        const Dataset1D ds = load_dataset1d(a.data);
        for (std::size_t i = 0; i < ds.xs.size(); ++i)
            samples.push_back({Tensor::scalar(ds.xs[i]), Tensor::scalar(ds.ys[i])});
    } else {
        const WindowedSeriesSet set = load_windows(a.data);
        d = set.channels();
        t = set.time_steps();
        for (const Tensor& s : set.samples) samples.push_back({s, s});
    }
    const ModelConfig mcfg = resolve_model_config(cfg_json, d, t);

    fs::create_directories(a.out);
    const std::uint64_t base_seed = tcfg.seed;
    for (std::size_t r = 0; r < tcfg.runs; ++r) {
        TrainConfig run_cfg = tcfg;
        run_cfg.seed = base_seed + r;
        const fs::path run_dir = fs::path(a.out) / ("run" + std::to_string(r));
        fs::create_directories(run_dir);
        const TrainResult result = train(mcfg, samples, run_cfg);
        for (const Checkpoint& cp : result.checkpoints)
            save_checkpoint(cp, (run_dir / checkpoint_filename(cp.epoch)).string());
        write_loss_csv(result.loss_curve, run_dir / "loss.csv");
    }

    json settings;
    settings["config_path"] = a.config;
    settings["data"] = a.data;
    settings["model"] = mcfg.to_json();
    settings["training"] = train_config_to_json(tcfg);
    write_manifest(a.out, "train", settings);
    return 0;
}

struct AnalyzeArgs {
    std::string checkpoints, data, out = ".";
    std::int64_t k0 = -1;
    bool per_variable = false;
    bool heatmap = false;
};

int cmd_analyze_freq(const AnalyzeArgs& a) {
    const std::vector<Checkpoint> cps = load_checkpoint_dir(a.checkpoints);
    fs::create_directories(a.out);
    const fs::path out(a.out);

    json settings;
    settings["checkpoints"] = a.checkpoints;
    settings["data"] = a.data;
    settings["per_variable"] = a.per_variable;

    if (cps.front().config.kind == ModelKind::mlp) {
        const Dataset1D ds = load_dataset1d(a.data);
        const std::size_t k0 = a.k0 > 0 ? static_cast<std::size_t>(a.k0) : kBenchmarkK0;
        const FrequencyTrace trace = trace_regression(cps, ds.xs, ds.ys, k0);
        export_trace_csv(trace, (out / "trace.csv").string());
        if (a.heatmap) {
            const auto matrix = per_bin_matrix(cps, ds.xs, ds.ys);
            export_heatmap_csv(trace.epochs, matrix, (out / "heatmap.csv").string());
        }
        settings["k0"] = k0;
    } else {
        const WindowedSeriesSet set = load_windows(a.data);
        const std::size_t k0 =
            a.k0 > 0 ? static_cast<std::size_t>(a.k0) : series_k0(set.time_steps());
        const FrequencyTrace trace = trace_reconstruction(cps, set.samples, k0);
        export_trace_csv(trace, (out / "trace.csv").string());
        if (a.per_variable)
            for (std::size_t c = 0; c < set.channels(); ++c)
                export_trace_csv(variable_trace(trace, c),
                                 (out / ("trace_var" + std::to_string(c) + ".csv")).string());
        settings["k0"] = k0;
    }
    write_manifest(a.out, "analyze-freq", settings);
    return 0;
}

struct ScoreArgs {
    std::string checkpoint, data, out = ".", policy = "quantile", calibration;
    double q = 0.95;
    bool metrics = false;
};

int cmd_score(const ScoreArgs& a) {
    const Checkpoint cp = load_checkpoint(a.checkpoint);
    Model model = restore_model(cp);
    const WindowedSeriesSet set = load_windows(a.data);
    ScoreSet scores = score(model, set);

    double threshold = 0.0;
    if (a.policy == "quantile") {
        std::vector<double> calib = scores.scores;
        if (!a.calibration.empty()) calib = score(model, load_windows(a.calibration)).scores;
        threshold = quantile_threshold(calib, a.q);
    } else if (a.policy == "best_f1") {
        if (!set.labeled())
            throw ValidationError("score: labels required for the best_f1 policy");
        threshold = best_f1_threshold(scores.scores, scores.labels);
    } else {
        throw ValidationError("score: unknown policy '" + a.policy +
                              "' (expected quantile or best_f1)");
    }
    scores.threshold = threshold;

    fs::create_directories(a.out);
    const fs::path out(a.out);
    export_scores_csv(scores, (out / "scores.csv").string());

    json settings;
    settings["checkpoint"] = a.checkpoint;
    settings["data"] = a.data;
    settings["policy"] = a.policy;
    settings["threshold"] = threshold;
    if (a.metrics) {
        if (!set.labeled())
            throw ValidationError("score: labels required for --metrics");
        const Metrics m = confusion_metrics(scores.scores, scores.labels, threshold);
        const json mj = metrics_to_json(m, model_label(cp.config), a.policy, threshold);
        write_text(out / "metrics.json", mj.dump(2) + "\n");
        settings["metrics"] = mj;
    }
    write_manifest(a.out, "score", settings);
    return 0;
}

struct ReportArgs {
    std::string runs_dir, out;
};

int cmd_report(const ReportArgs& a) {
    if (!fs::is_directory(a.runs_dir)) throw IoError("'" + a.runs_dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(a.runs_dir))
        if (entry.path().filename() == "metrics.json") files.push_back(entry.path());
    if (files.empty()) throw IoError("no metrics.json files under '" + a.runs_dir + "'");
    std::sort(files.begin(), files.end());

    AnomalyReport report;
    std::string model_name = "model";
    for (const auto& p : files) {
        const json j = load_json_file(p.string());
        Metrics m;
        m.precision = j.at("precision").get<double>();
        m.recall = j.at("recall").get<double>();
        m.f1 = j.at("f1").get<double>();
        model_name = j.value("model", model_name);
        report.threshold_policy = j.value("threshold_policy", report.threshold_policy);
        report.add(p.parent_path().filename().string(), m);
    }

    const std::string out_dir = a.out.empty() ? a.runs_dir : a.out;
    fs::create_directories(out_dir);
    export_report_csv(report, model_name, (fs::path(out_dir) / "report.csv").string());

    std::printf("%-12s %-10s %10s %10s %10s\n", "run", "model", "precision", "recall", "f1");
    for (std::size_t i = 0; i < report.per_run.size(); ++i) {
        const Metrics& m = report.per_run[i];
        std::printf("%-12s %-10s %10.2f %10.2f %10.2f\n", report.run_names[i].c_str(),
                    model_name.c_str(), m.precision, m.recall, m.f1);
    }
    std::printf("%-12s %-10s %10.2f %10.2f %10.2f\n", "mean", model_name.c_str(),
                report.mean.precision, report.mean.recall, report.mean.f1);

    json settings;
    settings["runs_dir"] = a.runs_dir;
    settings["runs"] = report.per_run.size();
    write_manifest(out_dir, "report", settings);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral analysis of Fourier-feature autoencoders"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a benchmark dataset");
    gen_cmd->add_option("--kind", gen.kind, "step | sines | flights")->required();
    gen_cmd->add_option("--out", gen.out, "output directory");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--n", gen.n, "sample count (step/sines)");
    gen_cmd->add_option("--n-nominal", gen.n_nominal, "nominal window count (flights)");
    gen_cmd->add_option("--n-anomaly", gen.n_anomaly, "anomalous window count (flights)");
    gen_cmd->add_option("--channels", gen.channels, "variables per window (flights)");
    gen_cmd->add_option("--window", gen.window, "timesteps per window (flights)");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
    train_cmd->add_option("--config", tr.config, "JSON config file")->required();
    train_cmd->add_option("--data", tr.data, "training data file")->required();
    train_cmd->add_option("--out", tr.out, "output directory");
    train_cmd->add_option("--seed", tr.seed, "override training.seed");
    train_cmd->add_option("--epochs", tr.epochs, "override training.epochs");
    train_cmd->add_option("--runs", tr.runs, "override training.runs");
    train_cmd->add_option("--lr", tr.lr, "override training.lr");

    AnalyzeArgs an;
    auto* an_cmd = app.add_subcommand("analyze-freq", "band-error traces over checkpoints");
    an_cmd->add_option("--checkpoints", an.checkpoints, "checkpoint directory")->required();
    an_cmd->add_option("--data", an.data, "evaluation data file")->required();
    an_cmd->add_option("--out", an.out, "output directory");
    an_cmd->add_option("--k0", an.k0, "low/high band split bin");
    an_cmd->add_flag("--per-variable", an.per_variable, "emit one trace per variable");
    an_cmd->add_flag("--heatmap", an.heatmap, "emit the per-bin error matrix");

    ScoreArgs sc;
    auto* sc_cmd = app.add_subcommand("score", "reconstruction-error anomaly scores");
    sc_cmd->add_option("--checkpoint", sc.checkpoint, "checkpoint file")->required();
    sc_cmd->add_option("--data", sc.data, "evaluation windows file")->required();
    sc_cmd->add_option("--out", sc.out, "output directory");
    sc_cmd->add_option("--policy", sc.policy, "quantile | best_f1");
    sc_cmd->add_option("--q", sc.q, "quantile for the quantile policy");
    sc_cmd->add_option("--calibration", sc.calibration,
                       "windows file whose scores set the quantile threshold");
    sc_cmd->add_flag("--metrics", sc.metrics, "emit precision/recall/F1 (needs labels)");

    ReportArgs rp;
    auto* rp_cmd = app.add_subcommand("report", "aggregate per-run metrics into a mean table");
    rp_cmd->add_option("--runs-dir", rp.runs_dir, "directory containing per-run metrics")
        ->required();
    rp_cmd->add_option("--out", rp.out, "output directory (defaults to --runs-dir)");

    try {
        app.parse(argc, argv);
        if (gen_cmd->parsed()) return cmd_gen_data(gen);
        if (train_cmd->parsed()) return cmd_train(tr);
        if (an_cmd->parsed()) return cmd_analyze_freq(an);
        if (sc_cmd->parsed()) return cmd_score(sc);
        if (rp_cmd->parsed()) return cmd_report(rp);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
