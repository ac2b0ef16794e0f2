#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "csisense/optim.hpp"
#include "csisense/tensor.hpp"

namespace csisense {

// "CSNW" checkpoint: header {magic, u32 version, u32 tensor count}, then per
// tensor {u32 name length, name, u32 ndim, u32 dims[], f32 data}, then an
// optimizer section {u8 present, u64 step count, per-parameter f64 moment
// pairs}. Round trips are bit-exact.

struct CheckpointEntry {
    std::string name;
    Tensor tensor;
};

struct OptimizerSnapshot {
    bool present = false;
    int64_t step_count = 0;
    std::vector<std::pair<TensorT<double>, TensorT<double>>> moments;  // (m, v) per parameter
};

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors,
                     const OptimizerSnapshot& optimizer);

struct Checkpoint {
    std::vector<CheckpointEntry> tensors;
    OptimizerSnapshot optimizer;

    const Tensor* find(const std::string& name) const;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace csisense
