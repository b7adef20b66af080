#ifndef SPECLAB_OPTIM_HPP
#define SPECLAB_OPTIM_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/tensor.hpp"

namespace speclab {

enum class OptimizerKind { sgd, adam };

inline OptimizerKind optimizer_from_name(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ValidationError("training.optimizer: unknown optimizer '" + s + "'");
}

struct AdamState {
    std::vector<double> m, v;
};

/// One bias-corrected Adam update over a flat parameter/gradient span.
/// t is the 1-based step index.
inline void adam_step(double* params, const double* grads, std::size_t n,
                      AdamState& state, std::size_t t, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (t < 1) throw ValidationError("adam_step: t must be >= 1");
    if (state.m.size() != n) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

inline void sgd_step(double* params, const double* grads, std::size_t n, double lr) {
    for (std::size_t i = 0; i < n; ++i) params[i] -= lr * grads[i];
}

/// Optimizer over a fixed list of parameter tensors; Adam state is laid out
/// flat in the same order.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999,
              double eps = 1e-8)
        : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (!(lr > 0.0)) throw ValidationError("optimizer: lr must be positive");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw ValidationError("optimizer: betas must lie in [0, 1)");
    }

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
              double grad_scale = 1.0) {
        ++t_;
        std::size_t offset = 0;
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor& w = *params[p];
            Tensor& g = *grads[p];
            if (!w.same_shape(g))
                throw ValidationError("optimizer: gradient shape mismatch");
            scaled_.assign(g.data().begin(), g.data().end());
            if (grad_scale != 1.0)
                for (double& v : scaled_) v *= grad_scale;
            if (kind_ == OptimizerKind::adam) {
                ensure_state(offset + w.size());
                adam_step_range(w.data().data(), scaled_.data(), w.size(), offset);
            } else {
                sgd_step(w.data().data(), scaled_.data(), w.size(), lr_);
            }
            offset += w.size();
        }
    }

    std::size_t step_count() const { return t_; }

private:
    void ensure_state(std::size_t n) {
        if (m_.size() < n) {
            m_.resize(n, 0.0);
            v_.resize(n, 0.0);
        }
    }

    void adam_step_range(double* w, const double* g, std::size_t n, std::size_t offset) {
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < n; ++i) {
            double& m = m_[offset + i];
            double& v = v_[offset + i];
            m = beta1_ * m + (1.0 - beta1_) * g[i];
            v = beta2_ * v + (1.0 - beta2_) * g[i] * g[i];
            w[i] -= lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_);
        }
    }

    OptimizerKind kind_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
    std::vector<double> scaled_;
};

} // namespace speclab

#endif
