#include <algorithm>
#include <cmath>
#include <numeric>

#include "csisense/errors.hpp"
#include "csisense/losses.hpp"
#include "csisense/model.hpp"
#include "csisense/rng.hpp"

namespace csisense {

namespace {

void check_labels(const CsiNet& model, const std::vector<Instance>& data) {
    for (const auto& t : model.tasks()) {
        for (const auto& inst : data) {
            if (t.is_regression()) {
                if (!inst.label.has_biometrics())
                    throw DomainError("biometrics head needs biometric labels");
            } else {
                if (!inst.label.has_class())
                    throw DomainError("classification head needs class labels");
                if (static_cast<int>(inst.label.class_id) >= t.output_dim)
                    throw DomainError("class id " + std::to_string(inst.label.class_id) +
                                      " does not fit a head of width " +
                                      std::to_string(t.output_dim));
            }
        }
    }
}

}  // namespace

TrainLog train_model(CsiNet& model, const std::vector<Instance>& train_set,
                     const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) throw DomainError("training set is empty");
    check_labels(model, train_set);

    {
        size_t width = train_set.front().amplitude.size();
        std::vector<double> mean(width, 0.0), var(width, 0.0);
        for (const auto& inst : train_set)
            for (size_t c = 0; c < width; ++c) mean[c] += inst.amplitude[c];
        for (size_t c = 0; c < width; ++c) mean[c] /= static_cast<double>(train_set.size());
        for (const auto& inst : train_set)
            for (size_t c = 0; c < width; ++c) {
                double d = inst.amplitude[c] - mean[c];
                var[c] += d * d;
            }
        std::vector<float> m(width), s(width);
        for (size_t c = 0; c < width; ++c) {
            m[c] = static_cast<float>(mean[c]);
            s[c] = static_cast<float>(
                std::max(std::sqrt(var[c] / static_cast<double>(train_set.size())), 1e-12));
        }
        model.set_input_stats(m, s);
    }

    bool has_bio = false;
    for (const auto& t : model.tasks()) has_bio |= t.is_regression();
    if (has_bio) {
        std::array<float, 4> lo = train_set.front().label.biometrics;
        std::array<float, 4> hi = lo;
        for (const auto& inst : train_set) {
            for (int i = 0; i < 4; ++i) {
                lo[static_cast<size_t>(i)] =
                    std::min(lo[static_cast<size_t>(i)], inst.label.biometrics[static_cast<size_t>(i)]);
                hi[static_cast<size_t>(i)] =
                    std::max(hi[static_cast<size_t>(i)], inst.label.biometrics[static_cast<size_t>(i)]);
            }
        }
        model.set_bio_bounds(lo, hi);
    }

    Adam optimizer(model.params());
    TrainLog log;
    int channels = model.input_channels();

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double lr = lr_schedule(cfg.initial_lr, epoch, cfg.milestones, cfg.lr_decay);
        Rng shuffle_rng(stage_seed(cfg.seed, "train.shuffle") +
                        static_cast<uint64_t>(epoch) * 0x9e3779b97f4a7c15ull);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        int batches = 0;
        size_t cursor = 0;
        while (cursor < order.size()) {
            size_t take = std::min<size_t>(static_cast<size_t>(cfg.minibatch),
                                           order.size() - cursor);
            if (take < 2) break;  // batch norm needs more than one sample
            Tensor x({static_cast<int>(take), channels, 1, 1});
            std::vector<int> classes(take, 0);
            Tensor bio_target({static_cast<int>(take), 4});
            for (size_t i = 0; i < take; ++i) {
                const Instance& inst = train_set[order[cursor + i]];
                for (int c = 0; c < channels; ++c)
                    x[static_cast<int64_t>(i) * channels + c] = inst.amplitude[static_cast<size_t>(c)];
                if (inst.label.has_class()) classes[i] = static_cast<int>(inst.label.class_id);
                if (inst.label.has_biometrics()) {
                    auto normed = model.normalize_bio(inst.label.biometrics);
                    for (int b = 0; b < 4; ++b)
                        bio_target[static_cast<int64_t>(i) * 4 + b] = normed[static_cast<size_t>(b)];
                }
            }

            optimizer.zero_grad();
            auto outputs = model.forward(x, true);
            double total_loss = 0.0;
            std::map<Task, Tensor> grads;
            for (const auto& t : model.tasks()) {
                Tensor g;
                if (t.is_regression()) {
                    float l = l1_loss(outputs.at(t.task), bio_target, g);
                    total_loss += l;
                } else {
                    float l = cross_entropy_loss(outputs.at(t.task), classes, g);
                    total_loss += t.alpha * l;
                    if (t.alpha != 1.0) {
                        for (int64_t i = 0; i < g.numel(); ++i)
                            g[i] = static_cast<float>(g[i] * t.alpha);
                    }
                }
                grads[t.task] = std::move(g);
            }
            model.backward(grads);
            optimizer.step(lr);

            if (!std::isfinite(total_loss))
                throw DomainError("training loss became non-finite at epoch " +
                                  std::to_string(epoch));
            loss_sum += total_loss;
            ++batches;
            cursor += take;
        }
        if (batches == 0) throw DomainError("training set too small for the minibatch size");
        log.epoch_loss.push_back(loss_sum / batches);
    }
    return log;
}

namespace {

constexpr size_t kPredictBatch = 64;

}  // namespace

std::vector<int> predict_classes(CsiNet& model, const std::vector<Instance>& instances,
                                 Task head) {
    const TaskConfig& cfg = model.task_config(head);
    if (cfg.is_regression()) throw DomainError("classification predict called on a regression head");
    std::vector<int> out;
    out.reserve(instances.size());
    int channels = model.input_channels();
    for (size_t begin = 0; begin < instances.size(); begin += kPredictBatch) {
        size_t take = std::min(kPredictBatch, instances.size() - begin);
        Tensor x = CsiNet::batch_from_instances(instances, begin, take, channels);
        auto outputs = model.forward(x, false);
        const Tensor& logits = outputs.at(head);
        int c = logits.extent(1);
        for (size_t i = 0; i < take; ++i) {
            const float* row = logits.data() + static_cast<int64_t>(i) * c;
            int best = 0;
            for (int j = 1; j < c; ++j) {
                if (row[j] > row[best]) best = j;  // ties keep the lowest index
            }
            out.push_back(best);
        }
    }
    return out;
}

std::vector<std::array<float, 4>> predict_biometrics(CsiNet& model,
                                                     const std::vector<Instance>& instances) {
    const TaskConfig& cfg = model.task_config(Task::Biometrics);
    (void)cfg;
    std::vector<std::array<float, 4>> out;
    out.reserve(instances.size());
    int channels = model.input_channels();
    for (size_t begin = 0; begin < instances.size(); begin += kPredictBatch) {
        size_t take = std::min(kPredictBatch, instances.size() - begin);
        Tensor x = CsiNet::batch_from_instances(instances, begin, take, channels);
        auto outputs = model.forward(x, false);
        const Tensor& y = outputs.at(Task::Biometrics);
        for (size_t i = 0; i < take; ++i) {
            std::array<float, 4> normed{};
            for (int b = 0; b < 4; ++b) normed[static_cast<size_t>(b)] = y[static_cast<int64_t>(i) * 4 + b];
            out.push_back(model.denormalize_bio(normed));
        }
    }
    return out;
}

}  // namespace csisense
