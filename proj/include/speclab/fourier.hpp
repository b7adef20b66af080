#ifndef SPECLAB_FOURIER_HPP
#define SPECLAB_FOURIER_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/layers.hpp"
#include "speclab/rng.hpp"
#include "speclab/tensor.hpp"

namespace speclab {

enum class FourierNorm { none, inv_sqrt_m };

/// Fourier feature precursor layer.
///
/// Maps x in R^d to [a cos(2 pi B x); a sin(2 pi B x)] in R^{2m}, optionally
/// scaled by 1/sqrt(m). Applied channel-wise to [d, T] inputs, i.e. the
/// kernel-size-1 convolution reading: every time step is mapped
/// independently through the same frequency matrix B.
///
/// With trainable == false the frequency matrix stays bitwise constant
/// (random Fourier features); with trainable == true B receives gradients
/// like any other parameter. The amplitude a is fixed at 1 in both modes,
/// since the downstream dense weights absorb per-feature scales.
class FourierFeatureLayer : public Layer {
public:
    FourierFeatureLayer(std::size_t d, std::size_t m, bool trainable,
                        FourierNorm norm = FourierNorm::none)
        : frequencies_({m, d}), grad_frequencies_({m, d}),
          trainable_(trainable), norm_(norm) {}

    std::size_t input_dim() const { return frequencies_.dim(1); }
    std::size_t feature_count() const { return frequencies_.dim(0); }
    std::size_t output_dim() const { return 2 * feature_count(); }
    bool trainable() const { return trainable_; }
    FourierNorm norm() const { return norm_; }

    Tensor& frequencies() { return frequencies_; }
    const Tensor& frequencies() const { return frequencies_; }

    double scale() const {
        return norm_ == FourierNorm::inv_sqrt_m
                   ? 1.0 / std::sqrt(static_cast<double>(feature_count()))
                   : 1.0;
    }

    Tensor forward(const Tensor& x) override {
        const std::size_t d = input_dim(), m = feature_count();
        const bool series = x.rank() == 2;
        if (series ? x.dim(0) != d : x.size() != d)
            throw ValidationError("fourier: expected " + std::to_string(d) +
                                  " channels, got input " + x.shape_string());
        const std::size_t t_len = series ? x.dim(1) : 1;
        input_ = x;
        phase_ = Tensor({m, t_len});
        has_input_ = true;
        const double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t t = 0; t < t_len; ++t) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j)
                    acc += frequencies_.at(i, j) * (series ? x.at(j, t) : x[j]);
                phase_.at(i, t) = two_pi * acc;
            }
        }
        const double a = scale();
        Tensor y = series ? Tensor({2 * m, t_len}) : Tensor({2 * m});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t t = 0; t < t_len; ++t) {
                const double p = phase_.at(i, t);
                y.data()[i * t_len + t] = a * std::cos(p);
                y.data()[(m + i) * t_len + t] = a * std::sin(p);
            }
        }
        return y;
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        const std::size_t d = input_dim(), m = feature_count();
        const bool series = input_.rank() == 2;
        const std::size_t t_len = series ? input_.dim(1) : 1;
        if (upstream.size() != 2 * m * t_len)
            throw ValidationError("fourier: upstream shape " + upstream.shape_string() +
                                  " does not match output");
        const double a = scale();
        const double two_pi = 2.0 * std::numbers::pi;
        Tensor dx(input_.shape());
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t t = 0; t < t_len; ++t) {
                const double p = phase_.at(i, t);
                const double dcos = upstream.data()[i * t_len + t];
                const double dsin = upstream.data()[(m + i) * t_len + t];
                // d(phase) contribution, including the 2*pi of the map.
                const double dp = a * (-std::sin(p) * dcos + std::cos(p) * dsin) * two_pi;
                for (std::size_t j = 0; j < d; ++j) {
                    const double xv = series ? input_.at(j, t) : input_[j];
                    if (trainable_) grad_frequencies_.at(i, j) += dp * xv;
                    if (series)
                        dx.at(j, t) += dp * frequencies_.at(i, j);
                    else
                        dx[j] += dp * frequencies_.at(i, j);
                }
            }
        }
        return dx;
    }

    std::vector<Tensor*> params() override {
        if (trainable_) return {&frequencies_};
        return {};
    }
    std::vector<Tensor*> grads() override {
        if (trainable_) return {&grad_frequencies_};
        return {};
    }
    std::vector<Tensor*> state_tensors() override { return {&frequencies_}; }

    std::string name() const override { return trainable_ ? "tft" : "rft"; }

private:
    Tensor frequencies_, grad_frequencies_;
    bool trainable_;
    FourierNorm norm_;
    Tensor input_, phase_;
    bool has_input_ = false;
};

/// Builds a Fourier feature layer with B entries drawn i.i.d. from
/// Gaussian(0, sigma_f^2) using the library generator seeded with `seed`.
/// Gaussian sampling gives the closed-form target kernel
/// exp(-2 pi^2 sigma_f^2 ||x - x'||^2) for the unbiasedness checks.
inline FourierFeatureLayer init_fourier(std::size_t d, std::size_t m, double sigma_f,
                                        bool trainable, std::uint64_t seed,
                                        FourierNorm norm = FourierNorm::none) {
    if (d < 1 || m < 1) throw ValidationError("init_fourier: d and m must be >= 1");
    if (!(sigma_f > 0.0)) throw ValidationError("init_fourier: sigma_f must be positive");
    FourierFeatureLayer layer(d, m, trainable, norm);
    Rng rng(seed);
    for (std::size_t i = 0; i < layer.frequencies().size(); ++i)
        layer.frequencies()[i] = rng.gaussian(0.0, sigma_f);
    return layer;
}

/// gamma(x) without touching the layer's backward cache.
inline Tensor fourier_map(const FourierFeatureLayer& layer, const Tensor& x) {
    FourierFeatureLayer tmp(layer.input_dim(), layer.feature_count(), false, layer.norm());
    tmp.frequencies() = layer.frequencies();
    return tmp.forward(x);
}

/// gamma(x) . gamma(x'): an estimator of the shift-invariant kernel whose
/// expectation over Gaussian B is exp(-2 pi^2 sigma_f^2 ||x - x'||^2).
/// Requires inv_sqrt_m normalization so that x == x' gives exactly 1.
inline double kernel_estimate(const FourierFeatureLayer& layer, const Tensor& x,
                              const Tensor& x_prime) {
    if (layer.norm() != FourierNorm::inv_sqrt_m)
        throw ValidationError("kernel_estimate: inv_sqrt_m normalization required");
    // cos(u)cos(u') + sin(u)sin(u') == cos(u - u'); summed form avoids the
    // rounding that would keep k(x, x) from being exactly 1.
    const std::size_t d = layer.input_dim(), m = layer.feature_count();
    if (x.size() != d || x_prime.size() != d)
        throw ValidationError("kernel_estimate: inputs must have dimension " + std::to_string(d));
    const double two_pi = 2.0 * std::numbers::pi;
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double diff = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            diff += layer.frequencies().at(i, j) * (x[j] - x_prime[j]);
        acc += std::cos(two_pi * diff);
    }
    return acc / static_cast<double>(m);
}

/// Closed-form expectation of kernel_estimate for Gaussian-sampled B.
inline double gaussian_kernel(double sigma_f, double separation) {
    const double pi = std::numbers::pi;
    return std::exp(-2.0 * pi * pi * sigma_f * sigma_f * separation * separation);
}

} // namespace speclab

#endif
