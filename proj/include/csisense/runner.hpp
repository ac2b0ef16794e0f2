#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csisense/csi_data.hpp"
#include "csisense/model.hpp"
#include "csisense/report.hpp"
#include "csisense/tissue.hpp"

namespace csisense {

// Synthesis of one labeled dataset: a CSI sequence per class, where each
// class is one bundled subject profile.
struct SynthConfig {
    Band band = Band::GHz5;
    double tx_rx_distance_m = 1.6;
    int n_paths = 3;
    double subcarrier_center_hz = 5e9;
    double subcarrier_spacing_hz = 10e6;
    int n_subcarriers = 30;
    double sample_rate_hz = 100.0;
    double noise_sigma = 1e-4;
    uint64_t seed = 1;
    std::vector<int> subject_ids = {1, 3, 8, 16, 22};
    int frames_per_subject = 1000;

    std::string to_json() const;
    static SynthConfig from_json(const std::string& text);
    void validate() const;
};

struct FilterConfig {
    bool enabled = true;
    int median_window = 5;
    int mean_window = 5;
    int butterworth_order = 4;
    double butterworth_cutoff_hz = 10.0;
};

// Whole-pipeline configuration for train/eval/e2e.
struct PipelineConfig {
    SynthConfig synth;
    FilterConfig filter;
    bool augment = true;
    std::string task = "person";       // biometrics | person | sign | falling | joint
    std::string variant = "tc";        // tc | interp | hybrid
    std::string scale = "desk";        // desk | paper
    TrainConfig train;
    uint64_t seed = 1;                 // fans out to every stage
    double min_accuracy = 0.95;        // e2e pass thresholds
    double max_mae = 5.0;
    bool require_beat_naive_bayes = true;

    std::string to_json() const;
    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig from_json_file(const std::string& path);
};

// In-memory labeled dataset: one sequence per class.
struct LabeledDataset {
    std::vector<CsiSequence> sequences;
};

LabeledDataset synth_dataset(const SynthConfig& cfg, const std::string& task);
LabeledDataset load_dataset_dir(const std::string& dir);
void save_dataset_dir(const LabeledDataset& ds, const SynthConfig& cfg, const std::string& dir);

// median -> mean -> butterworth, per the configured chain; output sequences
// hold amplitudes (phase is discarded).
CsiSequence filter_sequence(const CsiSequence& seq, const FilterConfig& cfg);

struct SplitInstances {
    std::vector<Instance> train;      // augmented when augmentation is on
    std::vector<Instance> train_raw;  // pre-augmentation training split
    std::vector<Instance> test;
};

// Per class: amplitude extraction, chronological 4/5 split, then optional
// per-class augmentation of the training side.
SplitInstances prepare_instances(const LabeledDataset& ds, const FilterConfig& filter,
                                 bool augment, uint64_t seed);

struct E2eResult {
    bool passed = false;
    double accuracy = -1.0;
    double nb_accuracy = -1.0;
    double mae = -1.0;
    std::vector<EvalReport> reports;
    std::vector<double> epoch_loss;
    std::string failure;  // empty when passed
};

// Pipeline stages as used by the command-line driver. All write their
// outputs under out_dir and are deterministic for a fixed config.
void run_synth(const SynthConfig& cfg, const std::string& task, const std::string& out_dir);
void run_filter(const std::string& in_dir, const FilterConfig& cfg, const std::string& out_dir);
void run_augment(const std::string& in_dir, uint64_t seed, const std::string& out_dir);
void run_train(const PipelineConfig& cfg, const std::string& data_dir,
               const std::string& out_dir);
std::vector<EvalReport> run_eval(const PipelineConfig& cfg, const std::string& model_dir,
                                 const std::string& data_dir, const std::string& out_dir);
E2eResult run_e2e(const PipelineConfig& cfg, const std::string& out_dir);

// Architecture pieces shared by train/eval: the heads implied by the task
// name ("joint" yields biometrics + person) and the model for a config.
std::vector<TaskConfig> heads_for_task(const std::string& task, int n_classes);
CsiNet build_model_for(const PipelineConfig& cfg, int n_classes, uint64_t seed);

}  // namespace csisense
