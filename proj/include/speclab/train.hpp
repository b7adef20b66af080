#ifndef SPECLAB_TRAIN_HPP
#define SPECLAB_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "speclab/checkpoint.hpp"
#include "speclab/errors.hpp"
#include "speclab/model.hpp"
#include "speclab/optim.hpp"
#include "speclab/rng.hpp"

namespace speclab {

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    std::size_t batch_size = 64;
    std::size_t epochs = 100;
    std::uint64_t seed = 1;
    /// 0 selects the default cadence: 20 log-spaced snapshots plus epoch 0
    /// and the final epoch (F-Principle dynamics are front-loaded).
    std::size_t checkpoint_every = 0;
    std::size_t runs = 1;
    bool kl_warmup = false;   // linear beta_kl ramp over the first 10% of epochs

    void validate() const {
        if (!(lr > 0.0)) throw ValidationError("training.lr must be positive");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw ValidationError("training betas must lie in [0, 1)");
        if (batch_size == 0) throw ValidationError("training.batch_size must be positive");
        if (runs < 1) throw ValidationError("training.runs must be >= 1");
    }
};

struct Sample {
    Tensor input;
    Tensor target;   // equals input for autoencoders
};

struct TrainResult {
    Model model;
    std::vector<Checkpoint> checkpoints;
    std::vector<double> loss_curve;   // mean training loss per epoch
};

/// Epochs at which snapshots are taken: always 0 and `epochs`, plus either a
/// fixed stride or ~20 log-spaced points.
inline std::vector<std::size_t> checkpoint_epochs(std::size_t epochs, std::size_t every) {
    std::set<std::size_t> marks{0, epochs};
    if (every > 0) {
        for (std::size_t e = every; e < epochs; e += every) marks.insert(e);
    } else {
        const int n = 20;
        for (int i = 0; i < n; ++i) {
            const double f = std::pow(static_cast<double>(epochs),
                                      static_cast<double>(i) / (n - 1));
            marks.insert(static_cast<std::size_t>(std::llround(f)));
        }
    }
    return {marks.begin(), marks.end()};
}

/// Deterministic single-run training loop. The per-run generator drives
/// weight initialization, batch shuffling, and VAE eps draws, so identical
/// (config, seed) pairs give bitwise-identical checkpoints.
///
/// `on_epoch`, when set, is called after every epoch with the live model and
/// may return true to stop early (used by analysis harnesses; it must not
/// mutate the model).
inline TrainResult train(const ModelConfig& mcfg, const std::vector<Sample>& dataset,
                         const TrainConfig& tcfg,
                         const std::function<bool(std::size_t, Model&)>& on_epoch = nullptr) {
    tcfg.validate();
    if (dataset.empty()) throw ValidationError("train: dataset is empty");

    TrainResult result;
    result.model = build_model(mcfg, tcfg.seed);
    Model& model = result.model;
    Rng rng(tcfg.seed + 0x9e3779b9ULL);

    Optimizer opt(tcfg.optimizer, tcfg.lr, tcfg.beta1, tcfg.beta2, tcfg.eps_adam);
    const auto params = model.params();
    const auto grads = model.grads();

    const auto marks = checkpoint_epochs(tcfg.epochs, tcfg.checkpoint_every);
    auto maybe_snapshot = [&](std::size_t epoch) {
        if (std::binary_search(marks.begin(), marks.end(), epoch))
            result.checkpoints.push_back(
                snapshot_model(model, epoch, tcfg.seed, rng, result.loss_curve));
    };

    const std::size_t warmup =
        tcfg.kl_warmup ? std::max<std::size_t>(1, tcfg.epochs / 10) : 0;

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    maybe_snapshot(0);
    for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        rng.shuffle(order);
        const double kl_scale =
            warmup > 0 && epoch <= warmup
                ? static_cast<double>(epoch) / static_cast<double>(warmup)
                : 1.0;

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            model.zero_grads();
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const Sample& s = dataset[order[i]];
                const LossBreakdown lb = model.loss_and_backward(s.input, s.target, &rng, kl_scale);
                if (!std::isfinite(lb.total)) {
                    std::string layer = model.first_nonfinite_layer(s.input);
                    if (layer.empty()) layer = "loss";
                    throw NumericalError("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", first offending layer: " +
                                         layer);
                }
                batch_loss += lb.total;
            }
            const double inv_n = 1.0 / static_cast<double>(end - start);
            opt.step(params, grads, inv_n);
            epoch_loss += batch_loss;
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
        maybe_snapshot(epoch);
        if (on_epoch && on_epoch(epoch, model)) {
            // Record the stopping point even off the regular cadence.
            if (result.checkpoints.empty() || result.checkpoints.back().epoch != epoch)
                result.checkpoints.push_back(
                    snapshot_model(model, epoch, tcfg.seed, rng, result.loss_curve));
            break;
        }
    }
    return result;
}

struct ExperimentResult {
    std::vector<std::map<std::string, double>> per_run;
    std::map<std::string, double> mean;
};

/// Repeats an experiment `runs` times; run r gets seed base_seed + r. The
/// aggregate is the plain mean of every metric the runs report.
inline ExperimentResult run_experiment(
    const std::function<std::map<std::string, double>(std::uint64_t)>& run,
    std::uint64_t base_seed, std::size_t runs) {
    if (runs < 1) throw ValidationError("run_experiment: runs must be >= 1");
    ExperimentResult result;
    for (std::size_t r = 0; r < runs; ++r) {
        try {
            result.per_run.push_back(run(base_seed + r));
        } catch (const std::exception& e) {
            throw std::runtime_error("run " + std::to_string(r) + " failed: " + e.what());
        }
    }
    for (const auto& metrics : result.per_run)
        for (const auto& [k, v] : metrics) result.mean[k] += v;
    for (auto& [k, v] : result.mean) v /= static_cast<double>(runs);
    return result;
}

} // namespace speclab

#endif
