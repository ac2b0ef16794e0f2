#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "csisense/checkpoint.hpp"
#include "csisense/csi_data.hpp"
#include "csisense/layers.hpp"
#include "csisense/optim.hpp"

namespace csisense {

enum class GenMode { TransposedConv, Interpolation, Hybrid };
enum class ModelScale { Desk, Paper };

const char* gen_mode_name(GenMode m);
GenMode gen_mode_from_name(const std::string& s);
const char* scale_name(ModelScale s);
ModelScale scale_from_name(const std::string& s);

// One stage of the generation pipeline: either a transposed convolution
// (with batch norm and relu) or a bilinear resize to a fixed spatial size.
struct GenStageSpec {
    bool is_resize = false;
    int out_channels = 0;  // resize keeps channels; 0 means unchanged
    int k = 0, stride = 1, pad = 0, output_pad = 0;
    int target = 0;  // spatial size after a resize stage
};

// Eight-stage upsampler from 30x1x1 to channels x target x target.
//
// Desk scale targets 28 with upsampling on the even stages
// (1->2->4->14->28), so the hybrid variant's resize substitutions at stages
// 2, 4, 6 and 8 replace real upsampling work. Paper scale targets 224 via
// 1->2->4->7->14->28->56->112->224 with k<=4 kernels throughout.
struct GenerationConfig {
    GenMode mode = GenMode::TransposedConv;
    int target_spatial = 28;
    std::vector<GenStageSpec> stages;

    static GenerationConfig make(GenMode mode, ModelScale scale);
    int output_channels() const;
};

struct BackboneConfig {
    // (residual blocks, channels) per stage; the first block of every stage
    // after the first downsamples by 2.
    std::vector<std::pair<int, int>> stages = {{2, 16}, {2, 32}, {2, 64}};
    int feature_dim = 256;

    static BackboneConfig make(ModelScale scale, int feature_dim);
};

enum class Task { Biometrics, Person, Sign, Falling };

const char* task_name(Task t);
Task task_from_name(const std::string& s);

struct TaskConfig {
    Task task = Task::Person;
    int output_dim = 30;
    double alpha = 1.0;  // weight of the classification loss in joint training

    static TaskConfig make(Task task);
    // The standard head width of each task (4 / 30 / 10 / 2).
    static int default_output_dim(Task task);
    bool is_regression() const { return task == Task::Biometrics; }
};

struct TrainConfig {
    int epochs = 20;
    int minibatch = 20;
    double initial_lr = 0.001;
    uint64_t seed = 0;
    std::vector<int> milestones = {4, 7, 10, 13, 16, 18};
    double lr_decay = 0.9;

    void validate() const;
};

// The three-stage network: generation (upsampling), feature learning
// (mini-residual backbone, global average pool, feature projection) and one
// fully-connected head per task. The biometrics head output passes through
// relu, so predicted rates are non-negative.
class CsiNet {
public:
    static CsiNet build(const GenerationConfig& gen, const BackboneConfig& backbone,
                        const std::vector<TaskConfig>& tasks, uint64_t seed);

    std::map<Task, Tensor> forward(const Tensor& x, bool train);
    // Accumulates parameter gradients; head_grads are w.r.t. head outputs.
    void backward(const std::map<Task, Tensor>& head_grads);

    std::vector<Param*> params();
    std::vector<std::pair<std::string, Tensor*>> buffers();
    int64_t num_params();

    const std::vector<TaskConfig>& tasks() const { return tasks_; }
    const TaskConfig& task_config(Task t) const;
    int feature_dim() const { return feature_dim_; }
    int input_channels() const { return input_channels_; }

    // Shape bookkeeping for a batch of n: input, shape after the generation
    // stage, feature width, and each head's output width.
    std::vector<int> input_shape(int n) const;
    std::vector<int> generation_output_shape(int n) const;
    std::vector<std::vector<int>> trunk_shape_trace(int n) const;

    // Per-channel input standardization (mean/std over the training split);
    // identity until set. Raw synthetic amplitudes sit around 1e-3 volts,
    // far below the batch-norm epsilon, so inputs are standardized before
    // the trunk.
    void set_input_stats(const std::vector<float>& mean, const std::vector<float>& std_dev);
    const std::vector<float>& input_mean() const { return input_mean_; }
    const std::vector<float>& input_std() const { return input_std_; }

    // Biometric normalization bounds (min/max per biometric over the
    // training split); identity until set.
    void set_bio_bounds(const std::array<float, 4>& lo, const std::array<float, 4>& hi);
    const std::array<float, 4>& bio_min() const { return bio_min_; }
    const std::array<float, 4>& bio_max() const { return bio_max_; }
    std::array<float, 4> normalize_bio(const std::array<float, 4>& raw) const;
    std::array<float, 4> denormalize_bio(const std::array<float, 4>& normed) const;

    void save(const std::string& path, const Adam* optimizer = nullptr);
    void load_tensors(const Checkpoint& ckpt);
    void load_optimizer(const Checkpoint& ckpt, Adam& optimizer);

    // Input batch [n, 30, 1, 1] from instances; amplitudes are fed raw, the
    // first batch norm absorbs the physical scale.
    static Tensor batch_from_instances(const std::vector<Instance>& instances, size_t begin,
                                       size_t count, int expected_channels);

private:
    struct Head {
        TaskConfig config;
        std::unique_ptr<LinearT<float>> linear;
        bool relu_output = false;
        Tensor pre_relu;
    };

    SequentialT<float> trunk_;
    size_t gen_stage_count_ = 0;
    std::vector<Head> heads_;
    std::vector<TaskConfig> tasks_;
    int feature_dim_ = 0;
    int input_channels_ = 30;
    int gen_out_channels_ = 6;
    int gen_target_ = 28;
    Tensor features_;
    std::vector<float> input_mean_;  // empty means identity
    std::vector<float> input_std_;
    std::array<float, 4> bio_min_ = {0, 0, 0, 0};
    std::array<float, 4> bio_max_ = {1, 1, 1, 1};
};

// Training driver: minibatch Adam with the milestone learning-rate decay.
struct TrainLog {
    std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

TrainLog train_model(CsiNet& model, const std::vector<Instance>& train_set,
                     const TrainConfig& cfg);

std::vector<int> predict_classes(CsiNet& model, const std::vector<Instance>& instances,
                                 Task head);
std::vector<std::array<float, 4>> predict_biometrics(CsiNet& model,
                                                     const std::vector<Instance>& instances);

}  // namespace csisense
