#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/container.hpp"

namespace sleepdiff {

// Confusion matrix rows index ground truth, columns predictions.
struct MetricsReport {
    std::array<std::array<int, kNumStages>, kNumStages> confusion{};
    double accuracy = 0.0;  // percent
    double macro_f1 = 0.0;  // percent
    std::array<double, kNumStages> precision{};
    std::array<double, kNumStages> recall{};
    std::array<double, kNumStages> f1{};
    std::array<bool, kNumStages> absent{};  // class missing from ground truth

    int support(int cls) const {
        int s = 0;
        for (int c = 0; c < kNumStages; ++c) s += confusion[cls][c];
        return s;
    }
};

inline MetricsReport compute_metrics(const std::vector<int>& truth,
                                     const std::vector<int>& pred) {
    if (truth.empty()) throw std::invalid_argument("compute_metrics: empty ground truth");
    if (truth.size() != pred.size())
        throw std::invalid_argument("compute_metrics: size mismatch");

    MetricsReport r;
    int correct = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= kNumStages || pred[i] < 0 || pred[i] >= kNumStages)
            throw std::out_of_range("compute_metrics: label out of range");
        r.confusion[truth[i]][pred[i]]++;
        if (truth[i] == pred[i]) correct++;
    }
    r.accuracy = 100.0 * correct / truth.size();

    double f1_sum = 0.0;
    for (int c = 0; c < kNumStages; ++c) {
        int tp = r.confusion[c][c];
        int fn = r.support(c) - tp;
        int fp = 0;
        for (int g = 0; g < kNumStages; ++g)
            if (g != c) fp += r.confusion[g][c];
        r.precision[c] = (tp + fp) > 0 ? 100.0 * tp / (tp + fp) : 0.0;
        r.recall[c] = (tp + fn) > 0 ? 100.0 * tp / (tp + fn) : 0.0;
        double denom = 2 * tp + fp + fn;
        r.f1[c] = denom > 0 ? 100.0 * 2 * tp / denom : 0.0;
        r.absent[c] = (tp + fn) == 0;
        f1_sum += r.f1[c];
    }
    r.macro_f1 = f1_sum / kNumStages;
    return r;
}

inline std::string format_metrics(const MetricsReport& r) {
    static const char* names[kNumStages] = {"W", "N1", "N2", "N3", "REM"};
    std::string s;
    char buf[128];
    std::snprintf(buf, sizeof buf, "accuracy %.2f%%  macro-F1 %.2f%%\n", r.accuracy, r.macro_f1);
    s += buf;
    for (int c = 0; c < kNumStages; ++c) {
        std::snprintf(buf, sizeof buf, "  %-3s P %6.2f  R %6.2f  F1 %6.2f  support %d%s\n",
                      names[c], r.precision[c], r.recall[c], r.f1[c], r.support(c),
                      r.absent[c] ? "  (absent)" : "");
        s += buf;
    }
    s += "  confusion (rows = truth):\n";
    for (int g = 0; g < kNumStages; ++g) {
        s += "   ";
        for (int p = 0; p < kNumStages; ++p) {
            std::snprintf(buf, sizeof buf, " %6d", r.confusion[g][p]);
            s += buf;
        }
        s += "\n";
    }
    return s;
}

}  // namespace sleepdiff
