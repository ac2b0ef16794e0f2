#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "csisense/csi_data.hpp"

namespace csisense {

// Chronological split: train = first floor(4n/5) instances, test = the rest.
// No shuffling happens across the boundary. Requires n >= 5.
std::pair<std::vector<Instance>, std::vector<Instance>> split_train_test(
    const std::vector<Instance>& instances);

inline constexpr int kAugmentGroupSizes[] = {2, 3, 5, 7};

// Enlarges one class's training set with element-wise means of shuffled
// instance groups: for each k in {2,3,5,7} a seeded shuffle of the input is
// partitioned into floor(n/k) consecutive groups of k and each group's mean
// joins the result. Output order is the originals followed by the k groups
// in ascending k. All inputs must share one label; requires n >= 7.
// The shuffle stream of each k depends only on (seed, k).
std::vector<Instance> augment(const std::vector<Instance>& train, uint64_t seed);

// |augment(S)| for |S| = n.
size_t augmented_size(size_t n);

}  // namespace csisense
