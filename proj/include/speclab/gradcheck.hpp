#ifndef SPECLAB_GRADCHECK_HPP
#define SPECLAB_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "speclab/layers.hpp"
#include "speclab/rng.hpp"
#include "speclab/tensor.hpp"

namespace speclab {

/// Compares a layer's analytic gradients against central finite differences
/// of the scalar loss L(x) = r . forward(x) for a fixed random projection r.
/// Returns the max relative deviation over every input and parameter entry.
inline double grad_check(Layer& layer, const Tensor& x, std::uint64_t seed,
                         double h = 1e-5) {
    Rng rng(seed);
    Tensor input = x;

    Tensor out = layer.forward(input);
    Tensor projection(out.shape());
    for (std::size_t i = 0; i < projection.size(); ++i) projection[i] = rng.gaussian();

    layer.zero_grads();
    Tensor analytic_dx = layer.backward(projection);
    std::vector<Tensor> analytic_dp;
    for (Tensor* g : layer.grads()) analytic_dp.push_back(*g);

    auto loss = [&](const Tensor& in) {
        Tensor y = layer.forward(in);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += projection[i] * y[i];
        return s;
    };

    double worst = 0.0;
    auto compare = [&](double analytic, double numeric) {
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1.0});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    };

    for (std::size_t i = 0; i < input.size(); ++i) {
        const double saved = input[i];
        input[i] = saved + h;
        const double up = loss(input);
        input[i] = saved - h;
        const double down = loss(input);
        input[i] = saved;
        compare(analytic_dx[i], (up - down) / (2.0 * h));
    }

    auto params = layer.params();
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& param = *params[p];
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double saved = param[i];
            param[i] = saved + h;
            const double up = loss(input);
            param[i] = saved - h;
            const double down = loss(input);
            param[i] = saved;
            compare(analytic_dp[p][i], (up - down) / (2.0 * h));
        }
    }

    // Restore the cache to the unperturbed point.
    layer.forward(input);
    return worst;
}

} // namespace speclab

#endif
