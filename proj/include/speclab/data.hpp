#ifndef SPECLAB_DATA_HPP
#define SPECLAB_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <utility>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/format.hpp"
#include "speclab/rng.hpp"
#include "speclab/tensor.hpp"

namespace speclab {

struct Dataset1D {
    std::vector<double> xs;
    std::vector<double> ys;
    double lo = 0.0, hi = 0.0;
};

/// Two-step staircase benchmark: y = -1 below -0.5, 0 on [-0.5, 0.5],
/// +1 above 0.5, with xs drawn uniformly on [-1, 1] and sorted.
inline double step_target(double x) {
    if (x < -0.5) return -1.0;
    if (x > 0.5) return 1.0;
    return 0.0;
}

inline Dataset1D gen_step(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("gen_step: n must be >= 1");
    Dataset1D d;
    d.lo = -1.0;
    d.hi = 1.0;
    Rng rng(seed);
    d.xs.resize(n);
    for (auto& x : d.xs) x = rng.uniform(-1.0, 1.0);
    std::sort(d.xs.begin(), d.xs.end());
    d.ys.reserve(n);
    for (double x : d.xs) d.ys.push_back(step_target(x));
    return d;
}

inline double sines_target(double x) {
    return std::sin(x) + std::sin(3.0 * x) + std::sin(5.0 * x);
}

/// Mixture-of-sines benchmark y = sin(x) + sin(3x) + sin(5x) on a uniform
/// periodic grid (right endpoint excluded, so the DFT of ys puts the three
/// components exactly at bins 1, 3, 5).
inline Dataset1D gen_sines(std::size_t n, double lo = -std::numbers::pi,
                           double hi = std::numbers::pi) {
    if (n < 2) throw ValidationError("gen_sines: n must be >= 2");
    Dataset1D d;
    d.lo = lo;
    d.hi = hi;
    d.xs.resize(n);
    d.ys.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        d.ys[i] = sines_target(d.xs[i]);
    }
    return d;
}

enum class SampleLabel { nominal, anomaly };

inline const char* label_name(SampleLabel l) {
    return l == SampleLabel::nominal ? "nominal" : "anomaly";
}

inline SampleLabel label_from_name(const std::string& s) {
    if (s == "nominal") return SampleLabel::nominal;
    if (s == "anomaly") return SampleLabel::anomaly;
    throw IoError("unknown label '" + s + "'");
}

/// A set of [d, T] multivariate windows with per-sample labels. Labels ride
/// along for evaluation only; training consumes the sample tensors alone.
/// `labels` may be empty for unlabeled sets (scores only, no metrics).
struct WindowedSeriesSet {
    std::vector<Tensor> samples;          // each [d, T]
    std::vector<std::string> variable_names;
    std::vector<SampleLabel> labels;

    bool labeled() const { return labels.size() == samples.size() && !samples.empty(); }

    std::size_t size() const { return samples.size(); }
    std::size_t channels() const { return samples.empty() ? 0 : samples[0].dim(0); }
    std::size_t time_steps() const { return samples.empty() ? 0 : samples[0].dim(1); }
};

/// Desk-scale synthetic stand-in for the flight windows: nominal samples mix
/// three low-frequency sinusoids with one mid-band tone plus small noise;
/// anomalies add localized high-frequency bursts to a random subset of
/// channels, so the anomalous structure lives in the high band.
inline WindowedSeriesSet gen_synthetic_flights(std::size_t n_nominal, std::size_t n_anomaly,
                                               std::size_t d = 10, std::size_t t = 160,
                                               std::uint64_t seed = 1) {
    WindowedSeriesSet set;
    for (std::size_t c = 0; c < d; ++c) set.variable_names.push_back("var" + std::to_string(c));
    Rng rng(seed);
    const double two_pi = 2.0 * std::numbers::pi;
    auto make_sample = [&](bool anomalous) {
        Tensor s({d, t});
        for (std::size_t c = 0; c < d; ++c) {
            // Three low-frequency components (<= 3 cycles per window) plus a
            // weaker mid-band tone.
            double amp[4], freq[4], phase[4];
            for (int k = 0; k < 3; ++k) {
                amp[k] = rng.uniform(0.3, 1.0);
                freq[k] = static_cast<double>(k + 1) * rng.uniform(0.8, 1.2);
                phase[k] = rng.uniform(0.0, two_pi);
            }
            amp[3] = rng.uniform(0.2, 0.5);
            freq[3] = rng.uniform(8.0, 16.0);
            phase[3] = rng.uniform(0.0, two_pi);
            for (std::size_t i = 0; i < t; ++i) {
                const double u = static_cast<double>(i) / static_cast<double>(t);
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += amp[k] * std::sin(two_pi * freq[k] * u + phase[k]);
                s.at(c, i) = v + rng.gaussian(0.0, 0.02);
            }
        }
        if (anomalous) {
            const std::size_t n_bursts = 2 + rng.below(3);
            for (std::size_t b = 0; b < n_bursts; ++b) {
                const std::size_t c = rng.below(d);
                const double center = rng.uniform(0.2, 0.8);
                const double width = rng.uniform(0.05, 0.12);
                const double burst_freq = rng.uniform(25.0, 45.0);
                const double burst_amp = rng.uniform(1.5, 3.0);
                const double burst_phase = rng.uniform(0.0, two_pi);
                for (std::size_t i = 0; i < t; ++i) {
                    const double u = static_cast<double>(i) / static_cast<double>(t);
                    const double g = std::exp(-0.5 * std::pow((u - center) / width, 2.0));
                    s.at(c, i) += burst_amp * g * std::sin(two_pi * burst_freq * u + burst_phase);
                }
            }
        }
        return s;
    };
    for (std::size_t i = 0; i < n_nominal; ++i) {
        set.samples.push_back(make_sample(false));
        set.labels.push_back(SampleLabel::nominal);
    }
    for (std::size_t i = 0; i < n_anomaly; ++i) {
        set.samples.push_back(make_sample(true));
        set.labels.push_back(SampleLabel::anomaly);
    }
    return set;
}

// --- windowed-series CSV format -----------------------------------------
//
// Line 1:             n,d,T
// Line 2:             d comma-separated variable names
// Then per sample:    d rows of T comma-separated values, then a label line
//                     ("nominal", "anomaly", or "unlabeled").

inline void save_windows(const WindowedSeriesSet& set, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_windows: cannot open '" + path + "'");
    const std::size_t n = set.size(), d = set.channels(), t = set.time_steps();
    f << n << "," << d << "," << t << "\n";
    for (std::size_t c = 0; c < d; ++c) {
        if (c) f << ",";
        f << (c < set.variable_names.size() ? set.variable_names[c]
                                            : "var" + std::to_string(c));
    }
    f << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        const Tensor& s = set.samples[i];
        for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t j = 0; j < t; ++j) {
                if (j) f << ",";
                f << format_double(s.at(c, j));
            }
            f << "\n";
        }
        f << (i < set.labels.size() ? label_name(set.labels[i]) : "unlabeled") << "\n";
    }
    if (!f) throw IoError("save_windows: write failed for '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw IoError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

} // namespace detail

inline WindowedSeriesSet load_windows(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_windows: cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const std::string& what) {
        if (!std::getline(f, line))
            throw IoError("line " + std::to_string(line_no + 1) + ": missing " + what);
        ++line_no;
    };

    next_line("header n,d,T");
    auto header = detail::split_csv(line);
    if (header.size() != 3)
        throw IoError("line 1: header must be 'n,d,T', got '" + line + "'");
    const auto n = static_cast<std::size_t>(detail::parse_double(header[0], 1));
    const auto d = static_cast<std::size_t>(detail::parse_double(header[1], 1));
    const auto t = static_cast<std::size_t>(detail::parse_double(header[2], 1));
    if (n < 1 || d < 1 || t < 1) throw IoError("line 1: n, d, T must all be >= 1");

    WindowedSeriesSet set;
    next_line("variable-name line");
    set.variable_names = detail::split_csv(line);
    if (set.variable_names.size() != d)
        throw IoError("line 2: expected " + std::to_string(d) + " variable names, got " +
                      std::to_string(set.variable_names.size()));

    for (std::size_t i = 0; i < n; ++i) {
        Tensor s({d, t});
        for (std::size_t c = 0; c < d; ++c) {
            next_line("row " + std::to_string(c) + " of sample " + std::to_string(i));
            auto cells = detail::split_csv(line);
            if (cells.size() != t)
                throw IoError("sample " + std::to_string(i) + ", line " +
                              std::to_string(line_no) + ": expected " + std::to_string(t) +
                              " values, got " + std::to_string(cells.size()));
            for (std::size_t j = 0; j < t; ++j)
                s.at(c, j) = detail::parse_double(cells[j], line_no);
        }
        set.samples.push_back(std::move(s));
        next_line("label of sample " + std::to_string(i));
        if (line == "unlabeled") {
            if (!set.labels.empty())
                throw IoError("line " + std::to_string(line_no) +
                              ": cannot mix labeled and unlabeled samples");
        } else {
            if (set.labels.size() != i)
                throw IoError("line " + std::to_string(line_no) +
                              ": cannot mix labeled and unlabeled samples");
            set.labels.push_back(label_from_name(line));
        }
    }
    return set;
}

/// Per-channel z-score transform with stored statistics, fit on the training
/// split and reused verbatim at eval time.
struct ChannelNormalizer {
    std::vector<double> means, stds;

    static ChannelNormalizer fit(const WindowedSeriesSet& set) {
        if (set.size() == 0) throw ValidationError("normalizer: empty set");
        const std::size_t d = set.channels(), t = set.time_steps();
        ChannelNormalizer nz;
        nz.means.assign(d, 0.0);
        nz.stds.assign(d, 0.0);
        const double count = static_cast<double>(set.size() * t);
        for (const Tensor& s : set.samples)
            for (std::size_t c = 0; c < d; ++c)
                for (std::size_t j = 0; j < t; ++j) nz.means[c] += s.at(c, j);
        for (auto& m : nz.means) m /= count;
        for (const Tensor& s : set.samples)
            for (std::size_t c = 0; c < d; ++c)
                for (std::size_t j = 0; j < t; ++j) {
                    const double dlt = s.at(c, j) - nz.means[c];
                    nz.stds[c] += dlt * dlt;
                }
        for (auto& v : nz.stds) v = std::sqrt(v / count);
        for (auto& v : nz.stds)
            if (v == 0.0) v = 1.0;
        return nz;
    }

    Tensor transform(const Tensor& s) const {
        Tensor out(s.shape());
        const std::size_t d = s.dim(0), t = s.dim(1);
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t j = 0; j < t; ++j)
                out.at(c, j) = (s.at(c, j) - means[c]) / stds[c];
        return out;
    }

    Tensor inverse(const Tensor& s) const {
        Tensor out(s.shape());
        const std::size_t d = s.dim(0), t = s.dim(1);
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t j = 0; j < t; ++j)
                out.at(c, j) = s.at(c, j) * stds[c] + means[c];
        return out;
    }

    WindowedSeriesSet transform_set(const WindowedSeriesSet& set) const {
        WindowedSeriesSet out;
        out.variable_names = set.variable_names;
        out.labels = set.labels;
        for (const Tensor& s : set.samples) out.samples.push_back(transform(s));
        return out;
    }
};

/// Label-stratified, seed-deterministic split; returns (train, test).
inline std::pair<WindowedSeriesSet, WindowedSeriesSet> split_stratified(
    const WindowedSeriesSet& set, double test_fraction, std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction > 1.0)
        throw ValidationError("split: test_fraction must lie in [0, 1]");
    Rng rng(seed);
    WindowedSeriesSet train, test;
    train.variable_names = test.variable_names = set.variable_names;
    for (SampleLabel want : {SampleLabel::nominal, SampleLabel::anomaly}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < set.size(); ++i)
            if (set.labels[i] == want) idx.push_back(i);
        rng.shuffle(idx);
        const std::size_t n_test =
            static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            WindowedSeriesSet& dst = k < n_test ? test : train;
            dst.samples.push_back(set.samples[idx[k]]);
            dst.labels.push_back(want);
        }
    }
    return {std::move(train), std::move(test)};
}

// --- 1-D dataset CSV (x,y) ------------------------------------------------

inline void save_dataset1d(const Dataset1D& d, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_dataset1d: cannot open '" + path + "'");
    f << "x,y\n";
    for (std::size_t i = 0; i < d.xs.size(); ++i)
        f << format_double(d.xs[i]) << "," << format_double(d.ys[i]) << "\n";
    if (!f) throw IoError("save_dataset1d: write failed for '" + path + "'");
}

inline Dataset1D load_dataset1d(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_dataset1d: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || detail::split_csv(line) != std::vector<std::string>{"x", "y"})
        throw IoError("load_dataset1d: expected 'x,y' header in '" + path + "'");
    Dataset1D d;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv(line);
        if (cells.size() != 2)
            throw IoError("line " + std::to_string(line_no) + ": expected 2 columns");
        d.xs.push_back(detail::parse_double(cells[0], line_no));
        d.ys.push_back(detail::parse_double(cells[1], line_no));
    }
    if (d.xs.empty()) throw IoError("load_dataset1d: no data rows in '" + path + "'");
    d.lo = *std::min_element(d.xs.begin(), d.xs.end());
    d.hi = *std::max_element(d.xs.begin(), d.xs.end());
    return d;
}

} // namespace speclab

#endif
