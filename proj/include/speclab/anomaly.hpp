#ifndef SPECLAB_ANOMALY_HPP
#define SPECLAB_ANOMALY_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "speclab/data.hpp"
#include "speclab/errors.hpp"
#include "speclab/format.hpp"
#include "speclab/model.hpp"

namespace speclab {

/// Per-sample reconstruction errors plus the labels and threshold that
/// produced any downstream metrics.
struct ScoreSet {
    std::vector<double> scores;          // MSE over all channels/timesteps
    std::vector<SampleLabel> labels;
    double threshold = 0.0;
};

/// Scores every sample independently with the eval-mode model (VAE decodes
/// from mu, no sampling).
inline ScoreSet score(Model& model, const WindowedSeriesSet& set) {
    ScoreSet out;
    const bool saved = model.eval_mode;
    model.eval_mode = true;
    for (const Tensor& x : set.samples) {
        const Tensor xhat = model.reconstruct(x);
        out.scores.push_back(mse(xhat, x));
    }
    model.eval_mode = saved;
    out.labels = set.labels;
    return out;
}

enum class ThresholdPolicy { quantile, best_f1 };

/// Empirical q-quantile by the nearest-rank rule: the ceil(q*n)-th smallest
/// score (uses no anomaly labels).
inline double quantile_threshold(std::vector<double> scores, double q = 0.95) {
    if (scores.empty()) throw ValidationError("choose_threshold: empty score list");
    if (q <= 0.0 || q > 1.0) throw ValidationError("choose_threshold: q must lie in (0, 1]");
    std::sort(scores.begin(), scores.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(scores.size())));
    return scores[std::max<std::size_t>(rank, 1) - 1];
}

struct Metrics {
    double precision = 0.0;   // percent
    double recall = 0.0;      // percent
    double f1 = 0.0;          // percent
    bool precision_defined = true;   // false when TP+FP == 0
    bool recall_defined = true;      // false when TP+FN == 0
};

/// Positive class is "anomaly"; predicted positive iff score > threshold
/// (strict). Undefined fractions are reported as 0 with the flag cleared so
/// multi-run averages stay well defined.
inline Metrics confusion_metrics(const std::vector<double>& scores,
                                 const std::vector<SampleLabel>& labels, double threshold) {
    if (scores.size() != labels.size())
        throw ValidationError("confusion_metrics: scores/labels length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] > threshold;
        const bool actual = labels[i] == SampleLabel::anomaly;
        if (predicted && actual) ++tp;
        else if (predicted && !actual) ++fp;
        else if (!predicted && actual) ++fn;
    }
    Metrics m;
    if (tp + fp == 0) {
        m.precision_defined = false;
    } else {
        m.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
        m.recall_defined = false;
    } else {
        m.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

/// Sweeps every candidate threshold (midpoints between adjacent distinct
/// scores plus the extremes) on a labeled set and returns the F1 maximizer.
inline double best_f1_threshold(const std::vector<double>& scores,
                                const std::vector<SampleLabel>& labels) {
    if (scores.empty()) throw ValidationError("choose_threshold: empty score list");
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> candidates;
    candidates.push_back(sorted.front() - 1.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    candidates.push_back(sorted.back());
    double best_threshold = candidates.front(), best = -1.0;
    for (double thr : candidates) {
        const Metrics m = confusion_metrics(scores, labels, thr);
        if (m.f1 > best) {
            best = m.f1;
            best_threshold = thr;
        }
    }
    return best_threshold;
}

/// Per-run metrics with a plain mean across runs, the usual shape of a
/// multi-seed precision/recall/F1 table.
struct AnomalyReport {
    std::vector<std::string> run_names;
    std::vector<Metrics> per_run;
    Metrics mean;
    std::string threshold_policy;

    void add(const std::string& name, const Metrics& m) {
        run_names.push_back(name);
        per_run.push_back(m);
        recompute_mean();
    }

    void recompute_mean() {
        mean = Metrics{};
        if (per_run.empty()) return;
        for (const Metrics& m : per_run) {
            mean.precision += m.precision;
            mean.recall += m.recall;
            mean.f1 += m.f1;
        }
        const double n = static_cast<double>(per_run.size());
        mean.precision /= n;
        mean.recall /= n;
        mean.f1 /= n;
    }
};

inline void export_report_csv(const AnomalyReport& report, const std::string& model_name,
                              const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("export_report: cannot open '" + path + "'");
    f << "run,model,precision,recall,f1\n";
    for (std::size_t i = 0; i < report.per_run.size(); ++i) {
        const Metrics& m = report.per_run[i];
        f << report.run_names[i] << "," << model_name << "," << format_double(m.precision)
          << "," << format_double(m.recall) << "," << format_double(m.f1) << "\n";
    }
    f << "mean," << model_name << "," << format_double(report.mean.precision) << ","
      << format_double(report.mean.recall) << "," << format_double(report.mean.f1) << "\n";
    if (!f) throw IoError("export_report: write failed for '" + path + "'");
}

inline void export_scores_csv(const ScoreSet& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("export_scores: cannot open '" + path + "'");
    f << "sample,score,label\n";
    for (std::size_t i = 0; i < s.scores.size(); ++i)
        f << i << "," << format_double(s.scores[i]) << ","
          << (i < s.labels.size() ? label_name(s.labels[i]) : "") << "\n";
    if (!f) throw IoError("export_scores: write failed for '" + path + "'");
}

} // namespace speclab

#endif
