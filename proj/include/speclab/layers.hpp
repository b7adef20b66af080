#ifndef SPECLAB_LAYERS_HPP
#define SPECLAB_LAYERS_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/rng.hpp"
#include "speclab/tensor.hpp"

namespace speclab {

/// Differentiable layer contract. forward caches whatever backward needs;
/// backward returns the input gradient and accumulates (+=) into the
/// parameter gradients, so a mini-batch is a sequence of forward/backward
/// pairs followed by one optimizer step over the summed gradients.
///
/// A layer instance is single-threaded: backward must follow the matching
/// forward on the same instance.
class Layer {
public:
    virtual ~Layer() = default;

    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& upstream) = 0;

    /// Trainable parameters and their gradient accumulators (same order).
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }

    /// All persistent tensors, trainable or not (checkpoint payload).
    virtual std::vector<Tensor*> state_tensors() { return params(); }

    virtual std::string name() const = 0;

    void zero_grads() {
        for (Tensor* g : grads()) g->fill(0.0);
    }

protected:
    void require_forward_called(bool has_input) const {
        if (!has_input)
            throw ValidationError(name() + ": backward called before forward");
    }
};

/// Fully connected layer: y[i] = sum_j W[i,j] x[j] + b[i].
/// Accepts any input whose total size equals the fan-in (flattens).
class DenseLayer : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out)
        : weight_({out, in}), bias_({out}), grad_weight_({out, in}), grad_bias_({out}) {}

    static DenseLayer random(std::size_t in, std::size_t out, Rng& rng) {
        DenseLayer l(in, out);
        const double std = std::sqrt(1.0 / static_cast<double>(in));
        for (std::size_t i = 0; i < l.weight_.size(); ++i)
            l.weight_[i] = rng.gaussian(0.0, std);
        return l;
    }

    Tensor forward(const Tensor& x) override {
        const std::size_t in = weight_.dim(1), out = weight_.dim(0);
        if (x.size() != in)
            throw ValidationError("dense: input size " + std::to_string(x.size()) +
                                  " != fan-in " + std::to_string(in));
        input_ = x;
        has_input_ = true;
        Tensor y({out});
        for (std::size_t i = 0; i < out; ++i) {
            double acc = bias_[i];
            const double* wrow = weight_.data().data() + i * in;
            const double* xv = x.data().data();
            for (std::size_t j = 0; j < in; ++j) acc += wrow[j] * xv[j];
            y[i] = acc;
        }
        return y;
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        const std::size_t in = weight_.dim(1), out = weight_.dim(0);
        if (upstream.size() != out)
            throw ValidationError("dense: upstream size " + std::to_string(upstream.size()) +
                                  " != fan-out " + std::to_string(out));
        Tensor dx(input_.shape());
        for (std::size_t i = 0; i < out; ++i) {
            const double u = upstream[i];
            grad_bias_[i] += u;
            const double* wrow = weight_.data().data() + i * in;
            double* gwrow = grad_weight_.data().data() + i * in;
            const double* xv = input_.data().data();
            double* dxv = dx.data().data();
            for (std::size_t j = 0; j < in; ++j) {
                gwrow[j] += u * xv[j];
                dxv[j] += u * wrow[j];
            }
        }
        return dx;
    }

    std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&grad_weight_, &grad_bias_}; }
    std::string name() const override { return "dense"; }

    Tensor& weight() { return weight_; }
    Tensor& bias() { return bias_; }

private:
    Tensor weight_, bias_;
    Tensor grad_weight_, grad_bias_;
    Tensor input_;
    bool has_input_ = false;
};

/// 1-D convolution over [in_ch, T] inputs with zero padding.
/// Output length = floor((T + 2*padding - k) / stride) + 1.
class Conv1dLayer : public Layer {
public:
    Conv1dLayer(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                std::size_t stride = 1, std::size_t padding = 0)
        : kernels_({out_ch, in_ch, k}), bias_({out_ch}),
          grad_kernels_({out_ch, in_ch, k}), grad_bias_({out_ch}),
          stride_(stride), padding_(padding) {
        if (stride == 0) throw ValidationError("conv1d: stride must be positive");
    }

    static Conv1dLayer random(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                              std::size_t stride, std::size_t padding, Rng& rng) {
        Conv1dLayer l(in_ch, out_ch, k, stride, padding);
        const double std = std::sqrt(1.0 / static_cast<double>(in_ch * k));
        for (std::size_t i = 0; i < l.kernels_.size(); ++i)
            l.kernels_[i] = rng.gaussian(0.0, std);
        return l;
    }

    std::size_t out_length(std::size_t t) const {
        const std::size_t k = kernels_.dim(2);
        if (t + 2 * padding_ < k)
            throw ValidationError("conv1d: input length " + std::to_string(t) +
                                  " shorter than kernel " + std::to_string(k));
        return (t + 2 * padding_ - k) / stride_ + 1;
    }

    Tensor forward(const Tensor& x) override {
        check_input(x);
        input_ = x;
        has_input_ = true;
        const std::size_t oc = kernels_.dim(0), ic = kernels_.dim(1), k = kernels_.dim(2);
        const std::size_t t_in = x.dim(1), t_out = out_length(t_in);
        Tensor y({oc, t_out});
        for (std::size_t o = 0; o < oc; ++o) {
            for (std::size_t u = 0; u < t_out; ++u) {
                double acc = bias_[o];
                for (std::size_t c = 0; c < ic; ++c) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::ptrdiff_t src =
                            static_cast<std::ptrdiff_t>(u * stride_ + j) -
                            static_cast<std::ptrdiff_t>(padding_);
                        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_in)) continue;
                        acc += kernels_.at(o, c, j) * x.at(c, static_cast<std::size_t>(src));
                    }
                }
                y.at(o, u) = acc;
            }
        }
        return y;
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        const std::size_t oc = kernels_.dim(0), ic = kernels_.dim(1), k = kernels_.dim(2);
        const std::size_t t_in = input_.dim(1), t_out = out_length(t_in);
        if (upstream.rank() != 2 || upstream.dim(0) != oc || upstream.dim(1) != t_out)
            throw ValidationError("conv1d: upstream shape " + upstream.shape_string() +
                                  " does not match forward output");
        Tensor dx(input_.shape());
        for (std::size_t o = 0; o < oc; ++o) {
            for (std::size_t u = 0; u < t_out; ++u) {
                const double g = upstream.at(o, u);
                grad_bias_[o] += g;
                for (std::size_t c = 0; c < ic; ++c) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::ptrdiff_t src =
                            static_cast<std::ptrdiff_t>(u * stride_ + j) -
                            static_cast<std::ptrdiff_t>(padding_);
                        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_in)) continue;
                        grad_kernels_.at(o, c, j) += g * input_.at(c, static_cast<std::size_t>(src));
                        dx.at(c, static_cast<std::size_t>(src)) += g * kernels_.at(o, c, j);
                    }
                }
            }
        }
        return dx;
    }

    std::vector<Tensor*> params() override { return {&kernels_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&grad_kernels_, &grad_bias_}; }
    std::string name() const override { return "conv1d"; }

    Tensor& kernels() { return kernels_; }
    Tensor& bias() { return bias_; }

private:
    void check_input(const Tensor& x) const {
        if (x.rank() != 2 || x.dim(0) != kernels_.dim(1))
            throw ValidationError("conv1d: expected [" + std::to_string(kernels_.dim(1)) +
                                  ", T] input, got " + x.shape_string());
    }

    Tensor kernels_, bias_;
    Tensor grad_kernels_, grad_bias_;
    std::size_t stride_, padding_;
    Tensor input_;
    bool has_input_ = false;
};

/// Transposed 1-D convolution: the adjoint of Conv1dLayer's input map, used
/// for decoder up-sampling. Kernels are stored [in_ch, out_ch, k].
/// Output length = (T - 1)*stride + k - 2*padding + output_padding.
class ConvTranspose1dLayer : public Layer {
public:
    ConvTranspose1dLayer(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                         std::size_t stride = 1, std::size_t padding = 0,
                         std::size_t output_padding = 0)
        : kernels_({in_ch, out_ch, k}), bias_({out_ch}),
          grad_kernels_({in_ch, out_ch, k}), grad_bias_({out_ch}),
          stride_(stride), padding_(padding), output_padding_(output_padding) {
        if (stride == 0) throw ValidationError("convt1d: stride must be positive");
        if (output_padding >= stride && !(output_padding == 0 && stride == 1))
            throw ValidationError("convt1d: output_padding must be < stride");
    }

    static ConvTranspose1dLayer random(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                                       std::size_t stride, std::size_t padding,
                                       std::size_t output_padding, Rng& rng) {
        ConvTranspose1dLayer l(in_ch, out_ch, k, stride, padding, output_padding);
        const double std = std::sqrt(1.0 / static_cast<double>(in_ch * k));
        for (std::size_t i = 0; i < l.kernels_.size(); ++i)
            l.kernels_[i] = rng.gaussian(0.0, std);
        return l;
    }

    std::size_t out_length(std::size_t t) const {
        const std::size_t k = kernels_.dim(2);
        const std::size_t full = (t - 1) * stride_ + k + output_padding_;
        if (full < 2 * padding_ + 1)
            throw ValidationError("convt1d: padding too large for input length " + std::to_string(t));
        return full - 2 * padding_;
    }

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 2 || x.dim(0) != kernels_.dim(0))
            throw ValidationError("convt1d: expected [" + std::to_string(kernels_.dim(0)) +
                                  ", T] input, got " + x.shape_string());
        input_ = x;
        has_input_ = true;
        const std::size_t ic = kernels_.dim(0), oc = kernels_.dim(1), k = kernels_.dim(2);
        const std::size_t t_in = x.dim(1), t_out = out_length(t_in);
        Tensor y({oc, t_out});
        for (std::size_t o = 0; o < oc; ++o)
            for (std::size_t u = 0; u < t_out; ++u) y.at(o, u) = bias_[o];
        for (std::size_t c = 0; c < ic; ++c) {
            for (std::size_t t = 0; t < t_in; ++t) {
                const double v = x.at(c, t);
                for (std::size_t o = 0; o < oc; ++o) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::ptrdiff_t dst =
                            static_cast<std::ptrdiff_t>(t * stride_ + j) -
                            static_cast<std::ptrdiff_t>(padding_);
                        if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(t_out)) continue;
                        y.at(o, static_cast<std::size_t>(dst)) += kernels_.at(c, o, j) * v;
                    }
                }
            }
        }
        return y;
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        const std::size_t ic = kernels_.dim(0), oc = kernels_.dim(1), k = kernels_.dim(2);
        const std::size_t t_in = input_.dim(1), t_out = out_length(t_in);
        if (upstream.rank() != 2 || upstream.dim(0) != oc || upstream.dim(1) != t_out)
            throw ValidationError("convt1d: upstream shape " + upstream.shape_string() +
                                  " does not match forward output");
        Tensor dx(input_.shape());
        for (std::size_t o = 0; o < oc; ++o)
            for (std::size_t u = 0; u < t_out; ++u) grad_bias_[o] += upstream.at(o, u);
        for (std::size_t c = 0; c < ic; ++c) {
            for (std::size_t t = 0; t < t_in; ++t) {
                double acc = 0.0;
                for (std::size_t o = 0; o < oc; ++o) {
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::ptrdiff_t dst =
                            static_cast<std::ptrdiff_t>(t * stride_ + j) -
                            static_cast<std::ptrdiff_t>(padding_);
                        if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(t_out)) continue;
                        const double g = upstream.at(o, static_cast<std::size_t>(dst));
                        acc += kernels_.at(c, o, j) * g;
                        grad_kernels_.at(c, o, j) += g * input_.at(c, t);
                    }
                }
                dx.at(c, t) = acc;
            }
        }
        return dx;
    }

    std::vector<Tensor*> params() override { return {&kernels_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&grad_kernels_, &grad_bias_}; }
    std::string name() const override { return "convt1d"; }

private:
    Tensor kernels_, bias_;
    Tensor grad_kernels_, grad_bias_;
    std::size_t stride_, padding_, output_padding_;
    Tensor input_;
    bool has_input_ = false;
};

enum class ActivationKind { relu, tanh, sine, cosine, identity };

inline const char* activation_name(ActivationKind k) {
    switch (k) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::sine: return "sine";
        case ActivationKind::cosine: return "cosine";
        case ActivationKind::identity: return "identity";
    }
    return "?";
}

inline ActivationKind activation_from_name(const std::string& s) {
    if (s == "relu") return ActivationKind::relu;
    if (s == "tanh") return ActivationKind::tanh;
    if (s == "sine") return ActivationKind::sine;
    if (s == "cosine") return ActivationKind::cosine;
    if (s == "identity") return ActivationKind::identity;
    throw ValidationError("unknown activation '" + s + "'");
}

/// Elementwise activation with exact analytic derivative.
class ActivationLayer : public Layer {
public:
    explicit ActivationLayer(ActivationKind kind) : kind_(kind) {}

    Tensor forward(const Tensor& x) override {
        input_ = x;
        has_input_ = true;
        Tensor y(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = apply(x[i]);
        return y;
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        if (!upstream.same_shape(input_))
            throw ValidationError("activation: upstream shape " + upstream.shape_string() +
                                  " != input shape " + input_.shape_string());
        Tensor dx(input_.shape());
        for (std::size_t i = 0; i < input_.size(); ++i)
            dx[i] = upstream[i] * derivative(input_[i]);
        return dx;
    }

    std::string name() const override { return activation_name(kind_); }
    ActivationKind kind() const { return kind_; }

private:
    double apply(double v) const {
        switch (kind_) {
            case ActivationKind::relu: return v > 0.0 ? v : 0.0;
            case ActivationKind::tanh: return std::tanh(v);
            case ActivationKind::sine: return std::sin(v);
            case ActivationKind::cosine: return std::cos(v);
            case ActivationKind::identity: return v;
        }
        return v;
    }

    double derivative(double v) const {
        switch (kind_) {
            case ActivationKind::relu: return v > 0.0 ? 1.0 : 0.0;
            case ActivationKind::tanh: {
                const double t = std::tanh(v);
                return 1.0 - t * t;
            }
            case ActivationKind::sine: return std::cos(v);
            case ActivationKind::cosine: return -std::sin(v);
            case ActivationKind::identity: return 1.0;
        }
        return 1.0;
    }

    ActivationKind kind_;
    Tensor input_;
    bool has_input_ = false;
};

/// Fixed reinterpretation of the flat buffer (e.g. dense output back to
/// [channels, T] ahead of a transposed convolution).
class ReshapeLayer : public Layer {
public:
    explicit ReshapeLayer(std::vector<std::size_t> target) : target_(std::move(target)) {}

    Tensor forward(const Tensor& x) override {
        input_shape_ = x.shape();
        has_input_ = true;
        return x.reshaped(target_);
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        return upstream.reshaped(input_shape_);
    }

    std::string name() const override { return "reshape"; }

private:
    std::vector<std::size_t> target_;
    std::vector<std::size_t> input_shape_;
    bool has_input_ = false;
};

/// Tiles a [d, T] input cyclically up to out_channels channels. Baseline
/// stand-in for the Fourier precursor so parameter counts match.
class DuplicateChannelsLayer : public Layer {
public:
    DuplicateChannelsLayer(std::size_t in_ch, std::size_t out_ch)
        : in_ch_(in_ch), out_ch_(out_ch) {
        if (out_ch < in_ch) throw ValidationError("duplicate: out channels < in channels");
    }

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 2 || x.dim(0) != in_ch_)
            throw ValidationError("duplicate: expected [" + std::to_string(in_ch_) +
                                  ", T] input, got " + x.shape_string());
        t_ = x.dim(1);
        has_input_ = true;
        Tensor y({out_ch_, t_});
        for (std::size_t c = 0; c < out_ch_; ++c)
            for (std::size_t t = 0; t < t_; ++t) y.at(c, t) = x.at(c % in_ch_, t);
        return y;
    }

    Tensor backward(const Tensor& upstream) override {
        require_forward_called(has_input_);
        Tensor dx({in_ch_, t_});
        for (std::size_t c = 0; c < out_ch_; ++c)
            for (std::size_t t = 0; t < t_; ++t) dx.at(c % in_ch_, t) += upstream.at(c, t);
        return dx;
    }

    std::string name() const override { return "duplicate"; }

private:
    std::size_t in_ch_, out_ch_;
    std::size_t t_ = 0;
    bool has_input_ = false;
};

/// Sequential stack; backward in reverse order yields the chain-rule product.
class Sequential {
public:
    Sequential() = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor forward(const Tensor& x) {
        Tensor h = x;
        for (auto& l : layers_) h = l->forward(h);
        return h;
    }

    Tensor backward(const Tensor& upstream) {
        Tensor g = upstream;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<Tensor*> params() {
        std::vector<Tensor*> out;
        for (auto& l : layers_)
            for (Tensor* p : l->params()) out.push_back(p);
        return out;
    }

    std::vector<Tensor*> grads() {
        std::vector<Tensor*> out;
        for (auto& l : layers_)
            for (Tensor* g : l->grads()) out.push_back(g);
        return out;
    }

    std::vector<Tensor*> state_tensors() {
        std::vector<Tensor*> out;
        for (auto& l : layers_)
            for (Tensor* s : l->state_tensors()) out.push_back(s);
        return out;
    }

    void zero_grads() {
        for (auto& l : layers_) l->zero_grads();
    }

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }

    /// Name of the first layer whose forward output contains a non-finite
    /// value for input x, or empty string if all outputs are finite.
    std::string first_nonfinite_layer(const Tensor& x) {
        Tensor h = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            h = layers_[i]->forward(h);
            if (!h.all_finite())
                return layers_[i]->name() + "[" + std::to_string(i) + "]";
        }
        return "";
    }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

} // namespace speclab

#endif
