#pragma once

#include <vector>

#include "csisense/csi_data.hpp"

namespace csisense {

// Gaussian Naive Bayes over the 30 subcarrier amplitudes: per-class
// per-feature mean and variance (variance floored at 1e-9), prediction by
// log prior plus summed log densities, ties resolved to the lowest class.
class GaussianNaiveBayes {
public:
    static GaussianNaiveBayes fit(const std::vector<Instance>& instances);

    int predict(const Instance& instance) const;
    std::vector<int> predict(const std::vector<Instance>& instances) const;

    // Unnormalized log posterior per class, for diagnostics.
    std::vector<double> log_posterior(const Instance& instance) const;

    int n_classes() const { return static_cast<int>(log_prior_.size()); }
    size_t n_features() const { return n_features_; }

private:
    size_t n_features_ = 0;
    std::vector<double> log_prior_;
    std::vector<std::vector<double>> mean_;      // [class][feature]
    std::vector<std::vector<double>> variance_;  // [class][feature]
};

}  // namespace csisense
