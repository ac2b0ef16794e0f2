#include "csisense/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csisense/errors.hpp"

namespace csisense {

namespace {
constexpr double kVarianceFloor = 1e-9;
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

GaussianNaiveBayes GaussianNaiveBayes::fit(const std::vector<Instance>& instances) {
    if (instances.empty()) throw DomainError("cannot fit on an empty set");
    std::map<int, std::vector<const Instance*>> by_class;
    size_t width = instances.front().amplitude.size();
    for (const auto& inst : instances) {
        if (!inst.label.has_class()) throw DomainError("naive bayes needs class labels");
        if (inst.amplitude.size() != width)
            throw DomainError("all instances must share one feature width");
        by_class[static_cast<int>(inst.label.class_id)].push_back(&inst);
    }
    int max_class = by_class.rbegin()->first;

    GaussianNaiveBayes nb;
    nb.n_features_ = width;
    nb.log_prior_.assign(static_cast<size_t>(max_class) + 1, -1e300);
    nb.mean_.assign(static_cast<size_t>(max_class) + 1, std::vector<double>(width, 0.0));
    nb.variance_.assign(static_cast<size_t>(max_class) + 1, std::vector<double>(width, 1.0));

    double total = static_cast<double>(instances.size());
    for (const auto& [cls, members] : by_class) {
        if (members.size() < 2)
            throw DomainError("class " + std::to_string(cls) +
                              " needs at least 2 instances to estimate a variance");
        auto& mean = nb.mean_[static_cast<size_t>(cls)];
        auto& var = nb.variance_[static_cast<size_t>(cls)];
        std::fill(var.begin(), var.end(), 0.0);
        for (const Instance* inst : members)
            for (size_t f = 0; f < width; ++f) mean[f] += inst->amplitude[f];
        for (size_t f = 0; f < width; ++f) mean[f] /= static_cast<double>(members.size());
        for (const Instance* inst : members) {
            for (size_t f = 0; f < width; ++f) {
                double d = inst->amplitude[f] - mean[f];
                var[f] += d * d;
            }
        }
        for (size_t f = 0; f < width; ++f)
            var[f] = std::max(var[f] / static_cast<double>(members.size()), kVarianceFloor);
        nb.log_prior_[static_cast<size_t>(cls)] =
            std::log(static_cast<double>(members.size()) / total);
    }
    return nb;
}

std::vector<double> GaussianNaiveBayes::log_posterior(const Instance& instance) const {
    if (instance.amplitude.size() != n_features_)
        throw DomainError("feature width mismatch in naive bayes predict");
    std::vector<double> scores(log_prior_.size());
    for (size_t c = 0; c < log_prior_.size(); ++c) {
        double ll = log_prior_[c];
        const auto& mean = mean_[c];
        const auto& var = variance_[c];
        for (size_t f = 0; f < n_features_; ++f) {
            double d = instance.amplitude[f] - mean[f];
            ll += -0.5 * (kLog2Pi + std::log(var[f])) - 0.5 * d * d / var[f];
        }
        scores[c] = ll;
    }
    return scores;
}

int GaussianNaiveBayes::predict(const Instance& instance) const {
    auto scores = log_posterior(instance);
    int best = 0;
    for (size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[static_cast<size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

std::vector<int> GaussianNaiveBayes::predict(const std::vector<Instance>& instances) const {
    std::vector<int> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(predict(inst));
    return out;
}

}  // namespace csisense
