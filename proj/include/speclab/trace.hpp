#ifndef SPECLAB_TRACE_HPP
#define SPECLAB_TRACE_HPP

#include <string>
#include <vector>

#include "speclab/checkpoint.hpp"
#include "speclab/data.hpp"
#include "speclab/errors.hpp"
#include "speclab/model.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

/// Evaluates a regression model on a 1-D grid.
inline std::vector<double> predict_grid(Model& model, const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const Tensor y = model.reconstruct(Tensor::scalar(x));
        out.push_back(y[0]);
    }
    return out;
}

/// Band-error trace of a checkpoint series against a 1-D target: which
/// frequency bands the model has learned, checkpoint by checkpoint.
inline FrequencyTrace trace_regression(const std::vector<Checkpoint>& checkpoints,
                                       const std::vector<double>& grid_x,
                                       const std::vector<double>& target_y,
                                       std::size_t k0) {
    if (checkpoints.empty()) throw ValidationError("trace: no checkpoints");
    if (grid_x.size() != target_y.size())
        throw ValidationError("trace: grid/target length mismatch");
    FrequencyTrace trace;
    trace.k0 = k0;
    for (const Checkpoint& cp : checkpoints) {
        Model model = restore_model(cp);
        model.eval_mode = true;
        const auto pred = predict_grid(model, grid_x);
        const auto [lo, hi] = band_error(target_y, pred, k0);
        trace.epochs.push_back(cp.epoch);
        trace.e_low.push_back(lo);
        trace.e_high.push_back(hi);
    }
    return trace;
}

/// Per-frequency error matrix over a checkpoint series (heatmap payload).
inline std::vector<std::vector<double>> per_bin_matrix(
    const std::vector<Checkpoint>& checkpoints, const std::vector<double>& grid_x,
    const std::vector<double>& target_y) {
    std::vector<std::vector<double>> rows;
    for (const Checkpoint& cp : checkpoints) {
        Model model = restore_model(cp);
        model.eval_mode = true;
        rows.push_back(per_bin_error(target_y, predict_grid(model, grid_x)));
    }
    return rows;
}

/// Band-error trace of reconstruction models over multivariate windows:
/// per channel, the DFT runs along the time axis and errors are averaged
/// over samples; the aggregate trace averages across channels as well.
inline FrequencyTrace trace_reconstruction(const std::vector<Checkpoint>& checkpoints,
                                           const std::vector<Tensor>& samples,
                                           std::size_t k0) {
    if (checkpoints.empty()) throw ValidationError("trace: no checkpoints");
    if (samples.empty()) throw ValidationError("trace: no samples");
    const std::size_t d = samples[0].dim(0), t = samples[0].dim(1);
    FrequencyTrace trace;
    trace.k0 = k0;
    trace.var_low.assign(d, {});
    trace.var_high.assign(d, {});
    for (const Checkpoint& cp : checkpoints) {
        Model model = restore_model(cp);
        model.eval_mode = true;
        std::vector<double> low_sum(d, 0.0), high_sum(d, 0.0);
        for (const Tensor& x : samples) {
            if (x.dim(0) != d || x.dim(1) != t)
                throw ValidationError("trace: inconsistent sample shapes");
            const Tensor xhat = model.reconstruct(x);
            std::vector<double> target(t), pred(t);
            for (std::size_t c = 0; c < d; ++c) {
                for (std::size_t j = 0; j < t; ++j) {
                    target[j] = x.at(c, j);
                    pred[j] = xhat.at(c, j);
                }
                const auto [lo, hi] = band_error(target, pred, k0);
                low_sum[c] += lo;
                high_sum[c] += hi;
            }
        }
        const double inv_n = 1.0 / static_cast<double>(samples.size());
        double agg_low = 0.0, agg_high = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            trace.var_low[c].push_back(low_sum[c] * inv_n);
            trace.var_high[c].push_back(high_sum[c] * inv_n);
            agg_low += low_sum[c] * inv_n;
            agg_high += high_sum[c] * inv_n;
        }
        trace.epochs.push_back(cp.epoch);
        trace.e_low.push_back(agg_low / static_cast<double>(d));
        trace.e_high.push_back(agg_high / static_cast<double>(d));
    }
    return trace;
}

/// Extracts the per-variable trace `c` as a standalone two-band trace.
inline FrequencyTrace variable_trace(const FrequencyTrace& trace, std::size_t c) {
    FrequencyTrace out;
    out.k0 = trace.k0;
    out.epochs = trace.epochs;
    out.e_low = trace.var_low.at(c);
    out.e_high = trace.var_high.at(c);
    return out;
}

} // namespace speclab

#endif
