#include "csisense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csisense/errors.hpp"

namespace csisense {

RegressionReport mean_average_error(const std::vector<std::vector<double>>& truth,
                                    const std::vector<std::vector<double>>& predictions,
                                    const std::vector<int>& subject_ids) {
    if (truth.size() != predictions.size() || truth.size() != subject_ids.size())
        throw DomainError("metric inputs must have aligned lengths");
    if (truth.empty()) throw DomainError("cannot evaluate an empty instance set");
    size_t dims = truth.front().size();
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != dims || predictions[i].size() != dims)
            throw DomainError("all rows must share one dimensionality");
    }

    std::map<int, std::vector<size_t>> by_subject;
    for (size_t i = 0; i < subject_ids.size(); ++i) by_subject[subject_ids[i]].push_back(i);

    RegressionReport rep;
    for (const auto& [id, rows] : by_subject) rep.subjects.push_back(id);
    size_t n_subjects = rep.subjects.size();
    rep.subject_mae.assign(dims, std::vector<double>(n_subjects, 0.0));
    rep.subject_sd.assign(dims, std::vector<double>(n_subjects, 0.0));
    rep.mae_per_dim.assign(dims, 0.0);
    rep.msd_per_dim.assign(dims, 0.0);

    size_t k = 0;
    for (const auto& [id, rows] : by_subject) {
        for (size_t d = 0; d < dims; ++d) {
            double mean = 0.0;
            for (size_t i : rows) mean += std::abs(predictions[i][d] - truth[i][d]);
            mean /= static_cast<double>(rows.size());
            double var = 0.0;
            for (size_t i : rows) {
                double e = std::abs(predictions[i][d] - truth[i][d]) - mean;
                var += e * e;
            }
            var /= static_cast<double>(rows.size());
            rep.subject_mae[d][k] = mean;
            rep.subject_sd[d][k] = std::sqrt(var);
        }
        ++k;
    }
    for (size_t d = 0; d < dims; ++d) {
        double mae = 0.0, msd = 0.0;
        for (size_t s = 0; s < n_subjects; ++s) {
            mae += rep.subject_mae[d][s];
            msd += rep.subject_sd[d][s];
        }
        rep.mae_per_dim[d] = mae / static_cast<double>(n_subjects);
        rep.msd_per_dim[d] = msd / static_cast<double>(n_subjects);
        rep.mae += rep.mae_per_dim[d] / static_cast<double>(dims);
        rep.msd += rep.msd_per_dim[d] / static_cast<double>(dims);
    }
    return rep;
}

int64_t ConfusionMatrix::total() const {
    int64_t t = 0;
    for (int64_t c : counts) t += c;
    return t;
}

int64_t ConfusionMatrix::diagonal() const {
    int64_t t = 0;
    for (int i = 0; i < n_classes; ++i) t += at(i, i);
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          int n_classes) {
    if (truth.size() != predicted.size())
        throw DomainError("confusion inputs must have aligned lengths");
    if (n_classes < 1) throw DomainError("need at least one class");
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(static_cast<size_t>(n_classes) * n_classes, 0);
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 || predicted[i] >= n_classes)
            throw DomainError("label out of range at row " + std::to_string(i));
        ++cm.at(predicted[i], truth[i]);
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    int64_t total = cm.total();
    if (total == 0) throw DomainError("empty confusion matrix");
    return static_cast<double>(cm.diagonal()) / static_cast<double>(total);
}

std::vector<double> per_class_rate(const ConfusionMatrix& cm) {
    std::vector<double> rates(static_cast<size_t>(cm.n_classes), 0.0);
    for (int j = 0; j < cm.n_classes; ++j) {
        int64_t col = 0;
        for (int i = 0; i < cm.n_classes; ++i) col += cm.at(i, j);
        rates[static_cast<size_t>(j)] =
            col == 0 ? 0.0 : static_cast<double>(cm.at(j, j)) / static_cast<double>(col);
    }
    return rates;
}

}  // namespace csisense
