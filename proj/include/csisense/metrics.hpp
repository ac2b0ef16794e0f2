#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace csisense {

// Per-subject regression metrics: e_k is the mean absolute error of subject
// k, mAE the mean of the e_k, and mSD the mean over subjects of the
// per-subject standard deviation (population form) of the absolute errors.
struct RegressionReport {
    std::vector<int> subjects;                      // distinct ids, ascending
    std::vector<std::vector<double>> subject_mae;   // [dim][subject]
    std::vector<std::vector<double>> subject_sd;    // [dim][subject]
    std::vector<double> mae_per_dim;
    std::vector<double> msd_per_dim;
    double mae = 0.0;  // mean of mae_per_dim
    double msd = 0.0;

    size_t n_dims() const { return mae_per_dim.size(); }
};

// truth/predictions: one row per instance, any fixed dimensionality (4 for
// the biometric tasks, 1 for scalar series).
RegressionReport mean_average_error(const std::vector<std::vector<double>>& truth,
                                    const std::vector<std::vector<double>>& predictions,
                                    const std::vector<int>& subject_ids);

// counts[predicted][true]; column j sums to the number of true-j instances.
struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<int64_t> counts;  // n_classes * n_classes, prediction-major

    int64_t& at(int predicted, int truth) { return counts[static_cast<size_t>(predicted) * n_classes + truth]; }
    int64_t at(int predicted, int truth) const { return counts[static_cast<size_t>(predicted) * n_classes + truth]; }
    int64_t total() const;
    int64_t diagonal() const;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          int n_classes);
double accuracy(const ConfusionMatrix& cm);

// Fraction of true-class-j instances predicted as j, per class.
std::vector<double> per_class_rate(const ConfusionMatrix& cm);

}  // namespace csisense
