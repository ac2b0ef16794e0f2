#include "csisense/model.hpp"

#include <algorithm>
#include <cmath>

#include "csisense/errors.hpp"

namespace csisense {

const char* gen_mode_name(GenMode m) {
    switch (m) {
        case GenMode::TransposedConv: return "tc";
        case GenMode::Interpolation: return "interp";
        case GenMode::Hybrid: return "hybrid";
    }
    return "tc";
}

GenMode gen_mode_from_name(const std::string& s) {
    if (s == "tc" || s == "transposed_conv") return GenMode::TransposedConv;
    if (s == "interp" || s == "interpolation") return GenMode::Interpolation;
    if (s == "hybrid" || s == "tc+i") return GenMode::Hybrid;
    throw DomainError("unknown generation mode: " + s);
}

const char* scale_name(ModelScale s) { return s == ModelScale::Desk ? "desk" : "paper"; }

ModelScale scale_from_name(const std::string& s) {
    if (s == "desk") return ModelScale::Desk;
    if (s == "paper") return ModelScale::Paper;
    throw DomainError("unknown model scale: " + s);
}

const char* task_name(Task t) {
    switch (t) {
        case Task::Biometrics: return "biometrics";
        case Task::Person: return "person";
        case Task::Sign: return "sign";
        case Task::Falling: return "falling";
    }
    return "person";
}

Task task_from_name(const std::string& s) {
    if (s == "biometrics") return Task::Biometrics;
    if (s == "person") return Task::Person;
    if (s == "sign") return Task::Sign;
    if (s == "falling") return Task::Falling;
    throw DomainError("unknown task: " + s);
}

int TaskConfig::default_output_dim(Task task) {
    switch (task) {
        case Task::Biometrics: return 4;
        case Task::Person: return 30;
        case Task::Sign: return 10;
        case Task::Falling: return 2;
    }
    return 30;
}

TaskConfig TaskConfig::make(Task task) {
    TaskConfig c;
    c.task = task;
    c.output_dim = default_output_dim(task);
    c.alpha = 1.0;
    return c;
}

void TrainConfig::validate() const {
    if (epochs < 1 || minibatch < 2 || initial_lr < 0.0 || lr_decay <= 0.0)
        throw DomainError("train config values must be positive (minibatch >= 2)");
}

namespace {

GenStageSpec tc_stage(int out_ch, int k, int stride, int pad, int output_pad = 0) {
    GenStageSpec s;
    s.out_channels = out_ch;
    s.k = k;
    s.stride = stride;
    s.pad = pad;
    s.output_pad = output_pad;
    return s;
}

GenStageSpec resize_stage(int target) {
    GenStageSpec s;
    s.is_resize = true;
    s.target = target;
    return s;
}

}  // namespace

GenerationConfig GenerationConfig::make(GenMode mode, ModelScale scale) {
    GenerationConfig cfg;
    cfg.mode = mode;
    cfg.target_spatial = scale == ModelScale::Desk ? 28 : 224;
    if (mode == GenMode::Interpolation) {
        cfg.stages = {resize_stage(cfg.target_spatial)};
        return cfg;
    }

    if (scale == ModelScale::Desk) {
        if (mode == GenMode::TransposedConv) {
            // Spatial 1 ->1 ->2 ->2 ->4 ->4 ->14 ->14 ->28.
            cfg.stages = {
                tc_stage(48, 1, 1, 0),  tc_stage(40, 2, 1, 0), tc_stage(32, 3, 1, 1),
                tc_stage(24, 2, 2, 0),  tc_stage(16, 3, 1, 1), tc_stage(12, 5, 3, 0),
                tc_stage(8, 3, 1, 1),   tc_stage(6, 4, 2, 1),
            };
        } else {  // Hybrid: stages 2, 4, 6, 8 become bilinear resizes. The four
                  // remaining TC layers run wider so the variant keeps enough
                  // mixing capacity while staying below the TC parameter count.
            cfg.stages = {
                tc_stage(56, 1, 1, 0), resize_stage(2),  tc_stage(40, 3, 1, 1), resize_stage(4),
                tc_stage(24, 3, 1, 1), resize_stage(14), tc_stage(6, 3, 1, 1),  resize_stage(28),
            };
        }
    } else {
        if (mode == GenMode::TransposedConv) {
            // Spatial 1 ->2 ->4 ->7 ->14 ->28 ->56 ->112 ->224.
            cfg.stages = {
                tc_stage(256, 2, 1, 0), tc_stage(192, 2, 2, 0), tc_stage(128, 4, 1, 0),
                tc_stage(96, 4, 2, 1),  tc_stage(64, 4, 2, 1),  tc_stage(32, 4, 2, 1),
                tc_stage(16, 4, 2, 1),  tc_stage(6, 4, 2, 1),
            };
        } else {
            cfg.stages = {
                tc_stage(256, 2, 1, 0), resize_stage(4),   tc_stage(128, 4, 1, 0),
                resize_stage(14),       tc_stage(64, 4, 2, 1), resize_stage(56),
                tc_stage(6, 4, 2, 1),   resize_stage(224),
            };
        }
    }
    return cfg;
}

int GenerationConfig::output_channels() const {
    int ch = 30;
    for (const auto& s : stages) {
        if (!s.is_resize) ch = s.out_channels;
    }
    return ch;
}

BackboneConfig BackboneConfig::make(ModelScale, int feature_dim) {
    BackboneConfig cfg;
    cfg.feature_dim = feature_dim;
    return cfg;
}

const TaskConfig& CsiNet::task_config(Task t) const {
    for (const auto& c : tasks_) {
        if (c.task == t) return c;
    }
    throw DomainError(std::string("model has no head for task ") + task_name(t));
}

CsiNet CsiNet::build(const GenerationConfig& gen, const BackboneConfig& backbone,
                     const std::vector<TaskConfig>& tasks, uint64_t seed) {
    if (tasks.empty()) throw DomainError("model needs at least one task head");
    if (gen.stages.empty()) throw DomainError("generation config has no stages");
    if (gen.mode != GenMode::Interpolation && gen.stages.size() != 8)
        throw DomainError("transposed-convolution generation uses 8 stages, got " +
                          std::to_string(gen.stages.size()));

    CsiNet net;
    net.tasks_ = tasks;
    net.feature_dim_ = backbone.feature_dim;
    net.gen_target_ = gen.target_spatial;
    Rng rng(seed ^ fnv1a64("csinet.init"));

    int ch = net.input_channels_;
    int stage_index = 0;
    size_t layer_count = 0;
    for (const auto& s : gen.stages) {
        ++stage_index;
        std::string name = "gen" + std::to_string(stage_index);
        if (s.is_resize) {
            net.trunk_.add(std::make_unique<BilinearResizeT<float>>(s.target, s.target));
            ++layer_count;
        } else {
            net.trunk_.add(std::make_unique<TConv2dT<float>>(name, ch, s.out_channels, s.k,
                                                             s.stride, s.pad, s.output_pad, rng));
            net.trunk_.add(std::make_unique<BatchNorm2dT<float>>(name + ".bn", s.out_channels));
            net.trunk_.add(std::make_unique<ReluT<float>>());
            layer_count += 3;
            ch = s.out_channels;
        }
    }
    net.gen_out_channels_ = ch;
    net.gen_stage_count_ = layer_count;

    // Verify the generation chain lands on the configured square target.
    auto gen_shape = net.trunk_.output_shape({2, net.input_channels_, 1, 1});
    if (gen_shape[2] != gen.target_spatial || gen_shape[3] != gen.target_spatial)
        throw DomainError("generation stage produces " + Tensor::shape_str(gen_shape) +
                          ", expected spatial " + std::to_string(gen.target_spatial));

    if (backbone.stages.empty()) throw DomainError("backbone needs at least one stage");
    int stem_ch = backbone.stages.front().second;
    net.trunk_.add(std::make_unique<Conv2dT<float>>("stem", ch, stem_ch, 3, 2, 1, rng));
    net.trunk_.add(std::make_unique<BatchNorm2dT<float>>("stem.bn", stem_ch));
    net.trunk_.add(std::make_unique<ReluT<float>>());
    net.trunk_.add(std::make_unique<MaxPool2dT<float>>(2, 2));
    ch = stem_ch;
    for (size_t si = 0; si < backbone.stages.size(); ++si) {
        auto [blocks, channels] = backbone.stages[si];
        for (int b = 0; b < blocks; ++b) {
            int stride = (si > 0 && b == 0) ? 2 : 1;
            std::string name = "stage" + std::to_string(si + 1) + ".block" + std::to_string(b + 1);
            net.trunk_.add(std::make_unique<ResidualBlockT<float>>(name, ch, channels, stride, rng));
            ch = channels;
        }
    }
    net.trunk_.add(std::make_unique<GlobalAvgPoolT<float>>());
    net.trunk_.add(std::make_unique<LinearT<float>>("feature", ch, backbone.feature_dim, rng));
    net.trunk_.add(std::make_unique<ReluT<float>>());

    for (const auto& t : tasks) {
        if (t.output_dim < 1) throw DomainError("task head needs a positive output width");
        Head h;
        h.config = t;
        h.linear = std::make_unique<LinearT<float>>(std::string("head.") + task_name(t.task),
                                                    backbone.feature_dim, t.output_dim, rng);
        h.relu_output = t.is_regression();
        net.heads_.push_back(std::move(h));
    }
    return net;
}

std::map<Task, Tensor> CsiNet::forward(const Tensor& x, bool train) {
    if (x.dim() != 4 || x.extent(1) != input_channels_ || x.extent(2) != 1 || x.extent(3) != 1)
        throw DomainError("model input must be [n, " + std::to_string(input_channels_) +
                          ", 1, 1], got " + Tensor::shape_str(x.shape()));
    Tensor standardized = x;
    if (!input_mean_.empty()) {
        int n = x.extent(0);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < input_channels_; ++c) {
                int64_t idx = static_cast<int64_t>(i) * input_channels_ + c;
                standardized[idx] = (x[idx] - input_mean_[static_cast<size_t>(c)]) /
                                    input_std_[static_cast<size_t>(c)];
            }
    }
    features_ = trunk_.forward(standardized, train);
    std::map<Task, Tensor> out;
    for (auto& h : heads_) {
        Tensor y = h.linear->forward(features_, train);
        if (h.relu_output) {
            h.pre_relu = y;
            y = relu_forward(y);
        }
        out[h.config.task] = std::move(y);
    }
    return out;
}

void CsiNet::backward(const std::map<Task, Tensor>& head_grads) {
    Tensor d_features(features_.shape());
    for (auto& h : heads_) {
        auto it = head_grads.find(h.config.task);
        if (it == head_grads.end()) continue;
        Tensor g = it->second;
        if (h.relu_output) g = relu_backward(h.pre_relu, g);
        Tensor dx = h.linear->backward(g);
        for (int64_t i = 0; i < d_features.numel(); ++i) d_features[i] += dx[i];
    }
    trunk_.backward(d_features);
}

std::vector<Param*> CsiNet::params() {
    std::vector<Param*> out;
    trunk_.collect_params(out);
    for (auto& h : heads_) h.linear->collect_params(out);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> CsiNet::buffers() {
    std::vector<std::pair<std::string, Tensor*>> out;
    trunk_.collect_buffers(out);
    return out;
}

int64_t CsiNet::num_params() {
    int64_t n = 0;
    for (const Param* p : params()) n += p->value.numel();
    return n;
}

std::vector<int> CsiNet::input_shape(int n) const { return {n, input_channels_, 1, 1}; }

std::vector<int> CsiNet::generation_output_shape(int n) const {
    return {n, gen_out_channels_, gen_target_, gen_target_};
}

std::vector<std::vector<int>> CsiNet::trunk_shape_trace(int n) const {
    return trunk_.shape_trace(input_shape(n));
}

void CsiNet::set_input_stats(const std::vector<float>& mean, const std::vector<float>& std_dev) {
    if (mean.size() != static_cast<size_t>(input_channels_) || std_dev.size() != mean.size())
        throw DomainError("input statistics must cover every channel");
    for (float s : std_dev) {
        if (!(s > 0)) throw DomainError("input std must be positive");
    }
    input_mean_ = mean;
    input_std_ = std_dev;
}

void CsiNet::set_bio_bounds(const std::array<float, 4>& lo, const std::array<float, 4>& hi) {
    for (int i = 0; i < 4; ++i) {
        if (!(hi[i] >= lo[i])) throw DomainError("biometric bounds must satisfy max >= min");
    }
    bio_min_ = lo;
    bio_max_ = hi;
}

std::array<float, 4> CsiNet::normalize_bio(const std::array<float, 4>& raw) const {
    std::array<float, 4> out{};
    for (int i = 0; i < 4; ++i) {
        float span = bio_max_[i] - bio_min_[i];
        out[i] = span > 0 ? (raw[i] - bio_min_[i]) / span : 0.0f;
    }
    return out;
}

std::array<float, 4> CsiNet::denormalize_bio(const std::array<float, 4>& normed) const {
    std::array<float, 4> out{};
    for (int i = 0; i < 4; ++i)
        out[i] = bio_min_[i] + normed[i] * (bio_max_[i] - bio_min_[i]);
    return out;
}

void CsiNet::save(const std::string& path, const Adam* optimizer) {
    std::vector<std::pair<std::string, const Tensor*>> named;
    for (Param* p : params()) named.emplace_back(p->name, &p->value);
    for (auto& [name, t] : buffers()) named.emplace_back(name, t);
    Tensor lo(std::vector<int>{4}), hi(std::vector<int>{4});
    for (int i = 0; i < 4; ++i) {
        lo[i] = bio_min_[i];
        hi[i] = bio_max_[i];
    }
    named.emplace_back("norm.bio_min", &lo);
    named.emplace_back("norm.bio_max", &hi);
    Tensor imean(std::vector<int>{input_channels_}), istd = Tensor::full({input_channels_}, 1.0f);
    if (!input_mean_.empty()) {
        for (int i = 0; i < input_channels_; ++i) {
            imean[i] = input_mean_[static_cast<size_t>(i)];
            istd[i] = input_std_[static_cast<size_t>(i)];
        }
    }
    named.emplace_back("norm.input_mean", &imean);
    named.emplace_back("norm.input_std", &istd);

    OptimizerSnapshot snap;
    if (optimizer) {
        snap.present = true;
        snap.step_count = optimizer->step_count();
        for (const auto& st : const_cast<Adam*>(optimizer)->states())
            snap.moments.emplace_back(st.m, st.v);
    }
    save_checkpoint(path, named, snap);
}

void CsiNet::load_tensors(const Checkpoint& ckpt) {
    for (Param* p : params()) {
        const Tensor* t = ckpt.find(p->name);
        if (!t) throw ParseError("checkpoint is missing tensor " + p->name);
        if (t->shape() != p->value.shape())
            throw ParseError("checkpoint tensor " + p->name + " has shape " +
                             Tensor::shape_str(t->shape()) + ", expected " +
                             Tensor::shape_str(p->value.shape()));
        p->value = *t;
    }
    for (auto& [name, buf] : buffers()) {
        const Tensor* t = ckpt.find(name);
        if (!t) throw ParseError("checkpoint is missing buffer " + name);
        *buf = *t;
    }
    if (const Tensor* lo = ckpt.find("norm.bio_min")) {
        const Tensor* hi = ckpt.find("norm.bio_max");
        if (hi) {
            for (int i = 0; i < 4; ++i) {
                bio_min_[i] = (*lo)[i];
                bio_max_[i] = (*hi)[i];
            }
        }
    }
    if (const Tensor* imean = ckpt.find("norm.input_mean")) {
        const Tensor* istd = ckpt.find("norm.input_std");
        if (istd && imean->numel() == input_channels_) {
            input_mean_.assign(imean->data(), imean->data() + imean->numel());
            input_std_.assign(istd->data(), istd->data() + istd->numel());
        }
    }
}

void CsiNet::load_optimizer(const Checkpoint& ckpt, Adam& optimizer) {
    if (!ckpt.optimizer.present) throw ParseError("checkpoint carries no optimizer state");
    auto& states = optimizer.states();
    if (ckpt.optimizer.moments.size() != states.size())
        throw ParseError("optimizer state count mismatch");
    for (size_t i = 0; i < states.size(); ++i) {
        states[i].m = ckpt.optimizer.moments[i].first;
        states[i].v = ckpt.optimizer.moments[i].second;
        states[i].t = ckpt.optimizer.step_count;
    }
}

Tensor CsiNet::batch_from_instances(const std::vector<Instance>& instances, size_t begin,
                                    size_t count, int expected_channels) {
    Tensor x({static_cast<int>(count), expected_channels, 1, 1});
    for (size_t i = 0; i < count; ++i) {
        const auto& amp = instances[begin + i].amplitude;
        if (static_cast<int>(amp.size()) != expected_channels)
            throw DomainError("instance has " + std::to_string(amp.size()) +
                              " amplitudes, expected " + std::to_string(expected_channels));
        for (int c = 0; c < expected_channels; ++c)
            x[static_cast<int64_t>(i) * expected_channels + c] = amp[static_cast<size_t>(c)];
    }
    return x;
}

}  // namespace csisense
