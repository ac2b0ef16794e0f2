#include "csisense/augment.hpp"

#include <numeric>

#include "csisense/errors.hpp"
#include "csisense/rng.hpp"

namespace csisense {

std::pair<std::vector<Instance>, std::vector<Instance>> split_train_test(
    const std::vector<Instance>& instances) {
    size_t n = instances.size();
    if (n < 5) throw DomainError("need at least 5 instances to split 4/5 : 1/5");
    size_t n_train = 4 * n / 5;
    std::vector<Instance> train(instances.begin(), instances.begin() + static_cast<long>(n_train));
    std::vector<Instance> test(instances.begin() + static_cast<long>(n_train), instances.end());
    return {std::move(train), std::move(test)};
}

size_t augmented_size(size_t n) {
    size_t total = n;
    for (int k : kAugmentGroupSizes) total += n / static_cast<size_t>(k);
    return total;
}

std::vector<Instance> augment(const std::vector<Instance>& train, uint64_t seed) {
    size_t n = train.size();
    if (n < 7) throw DomainError("augmentation needs at least 7 instances");
    const Label& label = train.front().label;
    size_t width = train.front().amplitude.size();
    for (const auto& inst : train) {
        if (!(inst.label == label))
            throw DomainError("augmentation requires a single label per call");
        if (inst.amplitude.size() != width)
            throw DomainError("augmentation requires equal-length instances");
    }

    std::vector<Instance> out;
    out.reserve(augmented_size(n));
    out.insert(out.end(), train.begin(), train.end());

    std::vector<size_t> order(n);
    std::vector<double> acc(width);
    for (int k : kAugmentGroupSizes) {
        std::iota(order.begin(), order.end(), size_t{0});
        Rng rng(seed ^ (fnv1a64("augment.k") + static_cast<uint64_t>(k)));
        rng.shuffle(order);
        size_t groups = n / static_cast<size_t>(k);
        for (size_t g = 0; g < groups; ++g) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (size_t j = 0; j < static_cast<size_t>(k); ++j) {
                const auto& src = train[order[g * static_cast<size_t>(k) + j]].amplitude;
                for (size_t i = 0; i < width; ++i) acc[i] += src[i];
            }
            Instance mean;
            mean.label = label;
            mean.amplitude.resize(width);
            for (size_t i = 0; i < width; ++i)
                mean.amplitude[i] = static_cast<float>(acc[i] / k);
            out.push_back(std::move(mean));
        }
    }
    return out;
}

}  // namespace csisense
