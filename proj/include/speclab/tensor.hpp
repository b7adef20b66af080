#ifndef SPECLAB_TENSOR_HPP
#define SPECLAB_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "speclab/errors.hpp"

namespace speclab {

/// Dense row-major tensor of 64-bit reals. The single value/gradient carrier
/// for every layer and loss in the library.
///
/// When SPECLAB_CHECKED is defined, construction rejects NaN/Inf entries.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), values_(checked_size(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (values_.size() != checked_size(shape_))
            throw ValidationError("tensor: " + std::to_string(values_.size()) +
                                  " values do not fill shape " + shape_string());
#ifdef SPECLAB_CHECKED
        for (double v : values_)
            if (!std::isfinite(v))
                throw ValidationError("tensor: non-finite value at construction");
#endif
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor from_vector(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
        return Tensor({rows, cols}, std::move(v));
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    // 2-D access, row-major.
    double at(std::size_t i, std::size_t j) const { return values_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * shape_[1] + j]; }

    // 3-D access.
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return values_[(i * shape_[1] + j) * shape_[2] + k];
    }

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Tensor reshaped(std::vector<std::size_t> new_shape) const {
        Tensor t(std::move(new_shape), values_);
        return t;
    }

    std::string shape_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

private:
    static std::size_t checked_size(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw ValidationError("tensor: zero dimension in shape");
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

inline double mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ValidationError("mse: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

} // namespace speclab

#endif
