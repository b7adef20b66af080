#include <catch2/catch_amalgamated.hpp>

#include "speclab/data.hpp"
#include "speclab/rng.hpp"
#include "speclab/spectral.hpp"
#include "speclab/trace.hpp"
#include "speclab/train.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace speclab;

namespace {

// Independent O(N^2) oracle, written directly from the DFT definition.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                               static_cast<double>(t) / static_cast<double>(n);
            acc += x[t] * std::exp(std::complex<double>(0.0, ang));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> random_signal(std::size_t n, Rng& rng) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.gaussian();
    return x;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("dft rejects tiny inputs") {
    REQUIRE_THROWS_AS(dft({1.0}), ValidationError);
}

TEST_CASE("constant signal concentrates at bin zero") {
    const std::size_t n = 32;
    std::vector<double> x(n, 3.0);
    Spectrum s = dft(x);
    REQUIRE(std::abs(s.bins[0] - std::complex<double>(3.0 * n, 0.0)) < 1e-12);
    for (std::size_t k = 1; k < n; ++k) REQUIRE(std::abs(s.bins[k]) < 1e-12);
}

TEST_CASE("pure sine lands on bin 1 and its conjugate") {
    const std::size_t n = 64;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    Spectrum s = dft(x);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 1 || k == n - 1) {
            REQUIRE(std::abs(s.bins[k]) == Catch::Approx(n / 2.0).margin(1e-9));
        } else {
            REQUIRE(std::abs(s.bins[k]) < 1e-9);
        }
    }
}

TEST_CASE("fast path equals the naive oracle on all test sizes") {
    Rng rng(1);
    std::vector<std::size_t> sizes;
    for (std::size_t n = 2; n <= 64; ++n) sizes.push_back(n);
    sizes.push_back(128);
    sizes.push_back(160);
    sizes.push_back(256);
    for (std::size_t n : sizes) {
        const auto x = random_signal(n, rng);
        const Spectrum s = dft(x);
        const auto ref = naive_dft(x);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(s.bins[k] - ref[k]));
        REQUIRE(worst < 1e-9);
    }
}

TEST_CASE("Parseval identity on random signals", "[property]") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 8 + rng.below(120);
        const auto x = random_signal(n, rng);
        const Spectrum s = dft(x);
        double time_energy = 0.0, freq_energy = 0.0;
        for (double v : x) time_energy += v * v;
        for (const auto& b : s.bins) freq_energy += std::norm(b);
        freq_energy /= static_cast<double>(n);
        REQUIRE(std::abs(time_energy - freq_energy) / time_energy < 1e-9);
    }
}

TEST_CASE("dft linearity on random signal pairs", "[property]") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 16 + rng.below(48);
        const auto a = random_signal(n, rng);
        const auto b = random_signal(n, rng);
        const double ca = rng.gaussian(), cb = rng.gaussian();
        std::vector<double> mix(n);
        for (std::size_t i = 0; i < n; ++i) mix[i] = ca * a[i] + cb * b[i];
        const Spectrum sa = dft(a), sb = dft(b), sm = dft(mix);
        for (std::size_t k = 0; k < n; ++k)
            REQUIRE(std::abs(sm.bins[k] - (ca * sa.bins[k] + cb * sb.bins[k])) < 1e-9);
    }
}

TEST_CASE("band_error basics") {
    const std::size_t n = 64;
    std::vector<double> target(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        target[i] = std::sin(u) + std::sin(5.0 * u);
        pred[i] = std::sin(u);
    }

    SECTION("perfect prediction gives (0, 0)") {
        auto [lo, hi] = band_error(target, target, 2);
        REQUIRE(lo == 0.0);
        REQUIRE(hi == 0.0);
    }
    SECTION("missing high component is the entire high band") {
        auto [lo, hi] = band_error(target, pred, 2);
        REQUIRE(lo < 1e-9);
        REQUIRE(hi == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("zero prediction normalizes to one in both bands") {
        std::vector<double> zeros(n, 0.0);
        auto [lo, hi] = band_error(target, zeros, 2);
        REQUIRE(lo == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(hi == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("validation") {
        REQUIRE_THROWS_AS(band_error(target, std::vector<double>(10, 0.0), 2), ValidationError);
        REQUIRE_THROWS_AS(band_error(target, pred, 0), ValidationError);
        REQUIRE_THROWS_AS(band_error(target, pred, n / 2), ValidationError);
    }
}

TEST_CASE("band_error is scale-invariant in the common factor", "[property]") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 32;
        auto target = random_signal(n, rng);
        auto pred = random_signal(n, rng);
        const double c = rng.uniform(0.1, 10.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        std::vector<double> ts(n), ps(n);
        for (std::size_t i = 0; i < n; ++i) {
            ts[i] = c * target[i];
            ps[i] = c * pred[i];
        }
        auto [lo1, hi1] = band_error(target, pred, 4);
        auto [lo2, hi2] = band_error(ts, ps, 4);
        REQUIRE(std::abs(lo1 - lo2) < 1e-12);
        REQUIRE(std::abs(hi1 - hi2) < 1e-12);
    }
}

TEST_CASE("trace export: row counts, determinism, full-precision round-trip") {
    FrequencyTrace trace;
    trace.k0 = 2;
    trace.epochs = {0, 10};
    trace.e_low = {1.0 / 3.0, 0.1234567890123456789};
    trace.e_high = {0.9999999999999997, 1e-300};

    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "speclab_trace.csv").string();
    export_trace_csv(trace, path);

    const std::string first = read_file(path);
    // 2 checkpoints x 2 bands => header + 4 data rows
    REQUIRE(std::count(first.begin(), first.end(), '\n') == 5);

    export_trace_csv(trace, path);
    REQUIRE(read_file(path) == first);

    // parse back and compare exactly
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    REQUIRE(line == "epoch,band,value");
    std::vector<double> parsed;
    while (std::getline(f, line)) {
        const auto pos = line.rfind(',');
        parsed.push_back(std::strtod(line.c_str() + pos + 1, nullptr));
    }
    REQUIRE(parsed.size() == 4);
    REQUIRE(parsed[0] == trace.e_low[0]);
    REQUIRE(parsed[1] == trace.e_high[0]);
    REQUIRE(parsed[2] == trace.e_low[1]);
    REQUIRE(parsed[3] == trace.e_high[1]);
    std::filesystem::remove(path);
}

TEST_CASE("heatmap export shape") {
    const auto path = (std::filesystem::temp_directory_path() / "speclab_heat.csv").string();
    export_heatmap_csv({0, 5}, {{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}}, path);
    const std::string text = read_file(path);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 7);
    std::filesystem::remove(path);
}

TEST_CASE("trace of an exact model is zero; length equals checkpoint count") {
    // Identity "mlp": dense 1->1 with weight 1, bias 0 reproduces y = x.
    ModelConfig cfg;
    cfg.kind = ModelKind::mlp;
    cfg.input_channels = 1;
    cfg.encoder = {LayerSpec::dense_spec(1)};
    Model m = build_model(cfg, 1);
    m.encoder.params()[0]->at(0, 0) = 1.0;
    (*m.encoder.params()[1])[0] = 0.0;

    Rng rng(7);
    Checkpoint cp = snapshot_model(m, 0, 1, rng, {});
    Checkpoint cp2 = cp;
    cp2.epoch = 4;

    std::vector<double> grid(32), target(32);
    for (std::size_t i = 0; i < 32; ++i) {
        grid[i] = static_cast<double>(i) * 0.1;
        target[i] = grid[i];
    }
    FrequencyTrace trace = trace_regression({cp, cp2}, grid, target, 2);
    REQUIRE(trace.epochs.size() == 2);
    REQUIRE(trace.e_low[0] == 0.0);
    REQUIRE(trace.e_high[0] == 0.0);
}

TEST_CASE("multivariate trace produces one trace per variable") {
    ModelConfig cfg = default_window_config(ModelKind::ae, Precursor::none, 3, 16, 2, 4);
    Model m = build_model(cfg, 2);
    Rng rng(3);
    Checkpoint cp = snapshot_model(m, 0, 2, rng, {});

    WindowedSeriesSet set = gen_synthetic_flights(4, 0, 3, 16, 5);
    FrequencyTrace trace = trace_reconstruction({cp}, set.samples, 2);
    REQUIRE(trace.var_low.size() == 3);
    REQUIRE(trace.var_high.size() == 3);
    REQUIRE(trace.var_low[0].size() == 1);
    for (std::size_t c = 0; c < 3; ++c) {
        REQUIRE(trace.var_low[c][0] >= 0.0);
        REQUIRE(trace.var_high[c][0] >= 0.0);
    }
    FrequencyTrace one = variable_trace(trace, 1);
    REQUIRE(one.e_low == trace.var_low[1]);
}
