#include <catch2/catch_amalgamated.hpp>

#include "speclab/data.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;   // stdout + stderr
};

/// Runs the built binary with `args` from inside `dir`.
CliResult run_cli(const fs::path& dir, const std::string& args) {
    const fs::path log = dir / "cli_output.log";
    const std::string cmd = "cd '" + dir.string() + "' && '" + SPECLAB_CLI_PATH + "' " + args +
                            " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream f(log);
    r.output = {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    fs::remove(log);
    return r;
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::size_t count_checkpoints(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".bin") ++n;
    return n;
}

/// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("speclab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kToyConfig = R"({
  "model": {"preset": "window", "kind": "ae", "precursor": "rft",
            "latent_dim": 4, "fourier_m": 8},
  "training": {"epochs": 10, "batch_size": 4, "seed": 3, "checkpoint_every": 3}
})";

void write_toy_inputs(const fs::path& dir) {
    std::ofstream(dir / "cfg.json") << kToyConfig;
    CliResult gen = run_cli(dir, "gen-data --kind flights --n-nominal 12 --n-anomaly 6 "
                                 "--channels 3 --window 16 --seed 4 --out data");
    REQUIRE(gen.exit_code == 0);
}

} // namespace

TEST_CASE("gen-data sines: row count and rerun determinism") {
    const fs::path dir = scratch("gen");
    CliResult r = run_cli(dir, "gen-data --kind sines --n 256 --out a");
    REQUIRE(r.exit_code == 0);
    const std::string first = read_file(dir / "a" / "data.csv");
    REQUIRE(line_count(first) == 257);   // header + 256 rows

    REQUIRE(run_cli(dir, "gen-data --kind sines --n 256 --out b").exit_code == 0);
    REQUIRE(read_file(dir / "b" / "data.csv") == first);
    REQUIRE(fs::exists(dir / "a" / "manifest.json"));
}

TEST_CASE("gen-data flights: same seed gives identical files") {
    const fs::path dir = scratch("genfl");
    const std::string args =
        "gen-data --kind flights --n-nominal 5 --n-anomaly 2 --channels 2 --window 8 --seed 9";
    REQUIRE(run_cli(dir, args + " --out a").exit_code == 0);
    REQUIRE(run_cli(dir, args + " --out b").exit_code == 0);
    REQUIRE(read_file(dir / "a" / "windows.csv") == read_file(dir / "b" / "windows.csv"));
}

TEST_CASE("gen-data rejects an unknown kind with a usage message") {
    const fs::path dir = scratch("genbad");
    CliResult r = run_cli(dir, "gen-data --kind nope --out x");
    REQUIRE(r.exit_code == 1);
    REQUIRE_THAT(r.output, Catch::Matchers::ContainsSubstring("kind"));
}

TEST_CASE("train: exit 0, at least 2 checkpoints, byte-identical rerun") {
    const fs::path dir = scratch("train");
    write_toy_inputs(dir);

    CliResult r = run_cli(dir, "train --config cfg.json --data data/windows.csv --out runA");
    REQUIRE(r.exit_code == 0);
    REQUIRE(count_checkpoints(dir / "runA" / "run0") >= 2);
    REQUIRE(fs::exists(dir / "runA" / "run0" / "loss.csv"));
    REQUIRE(fs::exists(dir / "runA" / "manifest.json"));

    REQUIRE(run_cli(dir, "train --config cfg.json --data data/windows.csv --out runB")
                .exit_code == 0);
    for (const auto& e : fs::directory_iterator(dir / "runA" / "run0")) {
        const fs::path other = dir / "runB" / "run0" / e.path().filename();
        REQUIRE(read_file(e.path()) == read_file(other));
    }
}

TEST_CASE("train: missing latent_dim is named in the error") {
    const fs::path dir = scratch("trainbad");
    write_toy_inputs(dir);
    std::ofstream(dir / "bad.json") << R"({
      "model": {"preset": "window", "kind": "ae"},
      "training": {"epochs": 2}
    })";
    CliResult r = run_cli(dir, "train --config bad.json --data data/windows.csv --out x");
    REQUIRE(r.exit_code == 1);
    REQUIRE_THAT(r.output, Catch::Matchers::ContainsSubstring("latent_dim"));
}

TEST_CASE("train: missing files map to the i/o exit code") {
    const fs::path dir = scratch("trainio");
    write_toy_inputs(dir);
    REQUIRE(run_cli(dir, "train --config nope.json --data data/windows.csv --out x")
                .exit_code == 2);
    REQUIRE(run_cli(dir, "train --config cfg.json --data nope.csv --out x").exit_code == 2);
}

TEST_CASE("analyze-freq: trace rows, per-variable files, k0 validation") {
    const fs::path dir = scratch("freq");
    write_toy_inputs(dir);
    REQUIRE(run_cli(dir, "train --config cfg.json --data data/windows.csv --out run")
                .exit_code == 0);
    const std::size_t n_ckpt = count_checkpoints(dir / "run" / "run0");

    CliResult r = run_cli(dir, "analyze-freq --checkpoints run/run0 --data data/windows.csv "
                               "--per-variable --out freq");
    REQUIRE(r.exit_code == 0);
    // header + (low, high) per checkpoint
    REQUIRE(line_count(read_file(dir / "freq" / "trace.csv")) == 1 + 2 * n_ckpt);
    for (int c = 0; c < 3; ++c)
        REQUIRE(fs::exists(dir / "freq" / ("trace_var" + std::to_string(c) + ".csv")));
    REQUIRE_FALSE(fs::exists(dir / "freq" / "trace_var3.csv"));

    REQUIRE(run_cli(dir, "analyze-freq --checkpoints run/run0 --data data/windows.csv "
                         "--k0 8 --out bad").exit_code == 1);

    // rerun is byte-stable
    REQUIRE(run_cli(dir, "analyze-freq --checkpoints run/run0 --data data/windows.csv "
                         "--per-variable --out freq2").exit_code == 0);
    REQUIRE(read_file(dir / "freq" / "trace.csv") == read_file(dir / "freq2" / "trace.csv"));
}

TEST_CASE("score and report: end-to-end metric flow") {
    const fs::path dir = scratch("score");
    write_toy_inputs(dir);
    REQUIRE(run_cli(dir, "train --config cfg.json --data data/windows.csv --out run")
                .exit_code == 0);
    fs::path last;
    for (const auto& e : fs::directory_iterator(dir / "run" / "run0"))
        if (e.path().extension() == ".bin" && e.path().string() > last.string()) last = e.path();

    CliResult r = run_cli(dir, "score --checkpoint " + last.string() +
                               " --data data/windows.csv --policy best_f1 --metrics --out sc");
    REQUIRE(r.exit_code == 0);
    // header + one row per sample (12 nominal + 6 anomalous)
    REQUIRE(line_count(read_file(dir / "sc" / "scores.csv")) == 19);
    REQUIRE(fs::exists(dir / "sc" / "metrics.json"));

    CliResult rep = run_cli(dir, "report --runs-dir sc --out rep");
    REQUIRE(rep.exit_code == 0);
    // single run: mean row equals the run row apart from the run name
    const std::string csv = read_file(dir / "rep" / "report.csv");
    std::vector<std::string> lines;
    std::stringstream ss(csv);
    for (std::string line; std::getline(ss, line);) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    REQUIRE(lines[1].substr(lines[1].find(',')) == lines[2].substr(lines[2].find(',')));
}

TEST_CASE("report averages F1 across runs") {
    const fs::path dir = scratch("report");
    fs::create_directories(dir / "r0");
    fs::create_directories(dir / "r1");
    std::ofstream(dir / "r0" / "metrics.json") << R"({"model":"ae","threshold_policy":"best_f1",
      "threshold":0.5,"precision":60.0,"recall":60.0,"f1":60.0})";
    std::ofstream(dir / "r1" / "metrics.json") << R"({"model":"ae","threshold_policy":"best_f1",
      "threshold":0.5,"precision":70.0,"recall":70.0,"f1":70.0})";

    CliResult r = run_cli(dir, "report --runs-dir . --out out");
    REQUIRE(r.exit_code == 0);
    REQUIRE_THAT(r.output, Catch::Matchers::ContainsSubstring("65.00"));
    REQUIRE_THAT(read_file(dir / "out" / "report.csv"),
                 Catch::Matchers::ContainsSubstring("mean,ae,65,65,65"));
}

TEST_CASE("score: unlabeled data with --metrics is an explicit error") {
    const fs::path dir = scratch("unlabeled");
    write_toy_inputs(dir);
    REQUIRE(run_cli(dir, "train --config cfg.json --data data/windows.csv --out run")
                .exit_code == 0);
    fs::path last;
    for (const auto& e : fs::directory_iterator(dir / "run" / "run0"))
        if (e.path().extension() == ".bin" && e.path().string() > last.string()) last = e.path();

    // strip the labels
    using namespace speclab;
    WindowedSeriesSet set = load_windows((dir / "data" / "windows.csv").string());
    set.labels.clear();
    save_windows(set, (dir / "unlabeled.csv").string());

    CliResult scores_only = run_cli(dir, "score --checkpoint " + last.string() +
                                         " --data unlabeled.csv --out sc1");
    REQUIRE(scores_only.exit_code == 0);

    CliResult r = run_cli(dir, "score --checkpoint " + last.string() +
                               " --data unlabeled.csv --metrics --out sc2");
    REQUIRE(r.exit_code == 1);
    REQUIRE_THAT(r.output, Catch::Matchers::ContainsSubstring("labels required"));
}
