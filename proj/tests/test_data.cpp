#include <catch2/catch_amalgamated.hpp>

#include "speclab/data.hpp"
#include "speclab/spectral.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace speclab;

TEST_CASE("step target rule") {
    REQUIRE(step_target(0.7) == 1.0);
    REQUIRE(step_target(0.0) == 0.0);
    REQUIRE(step_target(-0.7) == -1.0);
    REQUIRE(step_target(0.5) == 0.0);
    REQUIRE(step_target(-0.5) == 0.0);
}

TEST_CASE("gen_step: domain, determinism, labels") {
    Dataset1D a = gen_step(500, 11);
    REQUIRE(a.xs.size() == 500);
    for (std::size_t i = 0; i < a.xs.size(); ++i) {
        REQUIRE(a.xs[i] >= -1.0);
        REQUIRE(a.xs[i] <= 1.0);
        REQUIRE(a.ys[i] == step_target(a.xs[i]));
        if (i) REQUIRE(a.xs[i] >= a.xs[i - 1]);
    }
    Dataset1D b = gen_step(500, 11);
    REQUIRE(a.xs == b.xs);
    Dataset1D c = gen_step(500, 12);
    REQUIRE(a.xs != c.xs);
}

TEST_CASE("gen_sines values") {
    REQUIRE(sines_target(0.0) == 0.0);
    REQUIRE(sines_target(std::numbers::pi / 2.0) == Catch::Approx(1.0).margin(1e-12));

    Dataset1D d = gen_sines(256);
    REQUIRE(d.xs.size() == 256);
    REQUIRE(d.xs.front() == Catch::Approx(-std::numbers::pi));
    // periodic grid: right endpoint excluded
    REQUIRE(d.xs.back() < std::numbers::pi);
}

TEST_CASE("gen_sines spectrum peaks at bins 1, 3, 5") {
    Dataset1D d = gen_sines(256);
    Spectrum s = dft(d.ys);
    // magnitudes over bins 1..N/2
    std::vector<std::pair<double, std::size_t>> mags;
    for (std::size_t k = 1; k <= 128; ++k) mags.push_back({std::abs(s.bins[k]), k});
    std::sort(mags.rbegin(), mags.rend());
    std::vector<std::size_t> top = {mags[0].second, mags[1].second, mags[2].second};
    std::sort(top.begin(), top.end());
    REQUIRE(top == std::vector<std::size_t>{1, 3, 5});
    // and everything else is numerically zero
    REQUIRE(mags[3].first < 1e-9 * mags[0].first);
}

TEST_CASE("gen_synthetic_flights shapes and labels") {
    WindowedSeriesSet set = gen_synthetic_flights(5, 3, 10, 160, 1);
    REQUIRE(set.size() == 8);
    REQUIRE(set.channels() == 10);
    REQUIRE(set.time_steps() == 160);
    REQUIRE(set.variable_names.size() == 10);
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(set.labels[i] == SampleLabel::nominal);
    for (std::size_t i = 5; i < 8; ++i) REQUIRE(set.labels[i] == SampleLabel::anomaly);

    WindowedSeriesSet none = gen_synthetic_flights(4, 0, 3, 16, 2);
    for (auto l : none.labels) REQUIRE(l == SampleLabel::nominal);

    // determinism
    WindowedSeriesSet again = gen_synthetic_flights(5, 3, 10, 160, 1);
    for (std::size_t i = 0; i < 8; ++i)
        REQUIRE(set.samples[i].data() == again.samples[i].data());
}

TEST_CASE("anomalies carry more high-band energy than nominals") {
    WindowedSeriesSet set = gen_synthetic_flights(20, 20, 10, 160, 3);
    const std::size_t k0 = series_k0(160);
    auto high_energy = [&](const Tensor& s) {
        double acc = 0.0;
        std::vector<double> row(160);
        for (std::size_t c = 0; c < 10; ++c) {
            for (std::size_t j = 0; j < 160; ++j) row[j] = s.at(c, j);
            Spectrum sp = dft(row);
            for (std::size_t k = k0 + 1; k <= 80; ++k) acc += std::norm(sp.bins[k]);
        }
        return acc;
    };
    double nominal = 0.0, anomaly = 0.0;
    for (std::size_t i = 0; i < 20; ++i) nominal += high_energy(set.samples[i]);
    for (std::size_t i = 20; i < 40; ++i) anomaly += high_energy(set.samples[i]);
    REQUIRE(anomaly > nominal);
}

TEST_CASE("windowed-series csv round-trip is bitwise lossless") {
    WindowedSeriesSet set = gen_synthetic_flights(3, 2, 4, 12, 5);
    const auto path = (std::filesystem::temp_directory_path() / "speclab_windows.csv").string();
    save_windows(set, path);
    WindowedSeriesSet back = load_windows(path);
    REQUIRE(back.size() == set.size());
    REQUIRE(back.variable_names == set.variable_names);
    REQUIRE(back.labels == set.labels);
    for (std::size_t i = 0; i < set.size(); ++i)
        REQUIRE(back.samples[i].data() == set.samples[i].data());
    std::filesystem::remove(path);
}

TEST_CASE("malformed windows file names the offending sample") {
    const auto path = (std::filesystem::temp_directory_path() / "speclab_bad.csv").string();
    {
        std::ofstream f(path);
        f << "4,1,3\n";
        f << "v0\n";
        f << "1,2,3\nnominal\n";
        f << "4,5,6\nnominal\n";
        f << "7,8,9\nnominal\n";
        f << "1,2\n";   // sample 3 has T mismatch
        f << "nominal\n";
    }
    REQUIRE_THROWS_WITH(load_windows(path), Catch::Matchers::ContainsSubstring("sample 3"));
    std::filesystem::remove(path);
}

TEST_CASE("unknown label and truncated files raise parse errors") {
    const auto path = (std::filesystem::temp_directory_path() / "speclab_bad2.csv").string();
    {
        std::ofstream f(path);
        f << "1,1,2\nv0\n1,2\nweird\n";
    }
    REQUIRE_THROWS_AS(load_windows(path), IoError);
    {
        std::ofstream f(path);
        f << "2,1,2\nv0\n1,2\nnominal\n";
    }
    REQUIRE_THROWS_AS(load_windows(path), IoError);
    std::filesystem::remove(path);
    REQUIRE_THROWS_AS(load_windows("/nonexistent/speclab.csv"), IoError);
}

TEST_CASE("z-score normalizer: statistics and exact inverse") {
    WindowedSeriesSet set = gen_synthetic_flights(10, 0, 3, 32, 7);
    ChannelNormalizer nz = ChannelNormalizer::fit(set);
    WindowedSeriesSet normed = nz.transform_set(set);

    const std::size_t d = 3, t = 32;
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0, var = 0.0;
        const double count = static_cast<double>(set.size() * t);
        for (const Tensor& s : normed.samples)
            for (std::size_t j = 0; j < t; ++j) mean += s.at(c, j);
        mean /= count;
        for (const Tensor& s : normed.samples)
            for (std::size_t j = 0; j < t; ++j) var += std::pow(s.at(c, j) - mean, 2);
        var /= count;
        REQUIRE(std::abs(mean) < 1e-10);
        REQUIRE(std::abs(std::sqrt(var) - 1.0) < 1e-10);
    }

    for (std::size_t i = 0; i < set.size(); ++i) {
        Tensor round = nz.inverse(normed.samples[i]);
        for (std::size_t k = 0; k < round.size(); ++k)
            REQUIRE(round[k] == Catch::Approx(set.samples[i][k]).margin(1e-12));
    }
}

TEST_CASE("stratified split is deterministic and label-balanced") {
    WindowedSeriesSet set = gen_synthetic_flights(40, 20, 2, 8, 9);
    auto [train1, test1] = split_stratified(set, 0.25, 13);
    auto [train2, test2] = split_stratified(set, 0.25, 13);

    std::size_t test_nominal = 0, test_anomaly = 0;
    for (auto l : test1.labels) (l == SampleLabel::nominal ? test_nominal : test_anomaly)++;
    REQUIRE(test_nominal == 10);
    REQUIRE(test_anomaly == 5);
    REQUIRE(train1.size() == 45);

    REQUIRE(test1.labels == test2.labels);
    for (std::size_t i = 0; i < test1.size(); ++i)
        REQUIRE(test1.samples[i].data() == test2.samples[i].data());
}

TEST_CASE("dataset1d csv round-trip") {
    Dataset1D d = gen_sines(64);
    const auto path = (std::filesystem::temp_directory_path() / "speclab_1d.csv").string();
    save_dataset1d(d, path);
    Dataset1D back = load_dataset1d(path);
    REQUIRE(back.xs == d.xs);
    REQUIRE(back.ys == d.ys);
    std::filesystem::remove(path);
}
