#ifndef SPECLAB_SPECTRAL_HPP
#define SPECLAB_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/format.hpp"

namespace speclab {

/// Forward DFT result. All N complex bins are kept; band analysis only
/// consumes bins 0..N/2 (real input, conjugate symmetry).
struct Spectrum {
    std::size_t n = 0;
    std::vector<std::complex<double>> bins;
};

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, decimation in time.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace detail

/// Forward DFT of a real signal: X_k = sum_n x_n e^{-2 pi i k n / N}.
/// Radix-2 fast path when N is a power of two, direct O(N^2) otherwise.
inline Spectrum dft(const std::vector<double>& signal) {
    const std::size_t n = signal.size();
    if (n < 2) throw ValidationError("dft: need at least 2 samples");
    Spectrum s;
    s.n = n;
    if (detail::is_power_of_two(n)) {
        s.bins.assign(signal.begin(), signal.end());
        detail::fft_radix2(s.bins);
    } else {
        s.bins.resize(n);
        const double w0 = -2.0 * std::numbers::pi / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t t = 0; t < n; ++t) {
                const double ang = w0 * static_cast<double>(k) * static_cast<double>(t);
                acc += signal[t] * std::complex<double>(std::cos(ang), std::sin(ang));
            }
            s.bins[k] = acc;
        }
    }
    return s;
}

constexpr double kBandEpsilon = 1e-12;

/// Per-band relative spectral errors:
///   e_band = sqrt(sum_{k in band} |Yhat_k - Y_k|^2)
///            / (sqrt(sum_{k in band} |Y_k|^2) + 1e-12)
/// Low band = bins 0..k0 inclusive; high band = bins k0+1..N/2.
inline std::pair<double, double> band_error(const std::vector<double>& target,
                                            const std::vector<double>& prediction,
                                            std::size_t k0) {
    if (target.size() != prediction.size())
        throw ValidationError("band_error: length mismatch " + std::to_string(target.size()) +
                              " vs " + std::to_string(prediction.size()));
    const std::size_t n = target.size();
    if (k0 < 1 || k0 >= n / 2)
        throw ValidationError("band_error: k0 must lie in [1, N/2), got " + std::to_string(k0));
    const Spectrum ts = dft(target);
    const Spectrum ps = dft(prediction);
    double num_low = 0.0, den_low = 0.0, num_high = 0.0, den_high = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double resid = std::norm(ps.bins[k] - ts.bins[k]);
        const double energy = std::norm(ts.bins[k]);
        if (k <= k0) {
            num_low += resid;
            den_low += energy;
        } else {
            num_high += resid;
            den_high += energy;
        }
    }
    return {std::sqrt(num_low) / (std::sqrt(den_low) + kBandEpsilon),
            std::sqrt(num_high) / (std::sqrt(den_high) + kBandEpsilon)};
}

/// Per-epoch band-error traces across training checkpoints; the F-Principle
/// observable. var_low/var_high carry one trace per input variable for
/// multivariate data.
struct FrequencyTrace {
    std::size_t k0 = 0;
    std::vector<std::size_t> epochs;
    std::vector<double> e_low;
    std::vector<double> e_high;
    std::vector<std::vector<double>> var_low;    // [variable][checkpoint]
    std::vector<std::vector<double>> var_high;
};

/// Writes a trace as CSV (`epoch,band,value` with bands "low"/"high"),
/// deterministic row order, full-precision floats.
inline void export_trace_csv(const FrequencyTrace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("export: cannot open '" + path + "' for writing");
    f << "epoch,band,value\n";
    for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
        f << trace.epochs[i] << ",low," << format_double(trace.e_low[i]) << "\n";
        f << trace.epochs[i] << ",high," << format_double(trace.e_high[i]) << "\n";
    }
    if (!f) throw IoError("export: write failed for '" + path + "'");
}

/// Writes a per-frequency error matrix as CSV (`epoch,bin,value`).
inline void export_heatmap_csv(const std::vector<std::size_t>& epochs,
                               const std::vector<std::vector<double>>& per_bin_error,
                               const std::string& path) {
    if (epochs.size() != per_bin_error.size())
        throw ValidationError("export_heatmap: epochs/rows mismatch");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("export: cannot open '" + path + "' for writing");
    f << "epoch,bin,value\n";
    for (std::size_t i = 0; i < epochs.size(); ++i)
        for (std::size_t k = 0; k < per_bin_error[i].size(); ++k)
            f << epochs[i] << "," << k << "," << format_double(per_bin_error[i][k]) << "\n";
    if (!f) throw IoError("export: write failed for '" + path + "'");
}

/// Per-bin relative error |Yhat_k - Y_k| / (|Y_k| + 1e-12) over bins 0..N/2.
inline std::vector<double> per_bin_error(const std::vector<double>& target,
                                         const std::vector<double>& prediction) {
    if (target.size() != prediction.size())
        throw ValidationError("per_bin_error: length mismatch");
    const Spectrum ts = dft(target);
    const Spectrum ps = dft(prediction);
    std::vector<double> out;
    for (std::size_t k = 0; k <= target.size() / 2; ++k)
        out.push_back(std::abs(ps.bins[k] - ts.bins[k]) / (std::abs(ts.bins[k]) + kBandEpsilon));
    return out;
}

/// Default cutoff for 1-D benchmarks: k0 = 2 isolates the k=1 fundamental
/// from the k=3,5 components of the sines target.
constexpr std::size_t kBenchmarkK0 = 2;

/// Default cutoff for windowed time series of length T: floor(T/16).
inline std::size_t series_k0(std::size_t t) { return std::max<std::size_t>(2, t / 16); }

} // namespace speclab

#endif
