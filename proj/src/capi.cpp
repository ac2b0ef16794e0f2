#include <csisense.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "csisense/errors.hpp"
#include "csisense/model.hpp"
#include "csisense/parallel.hpp"
#include "csisense/runner.hpp"
#include "csisense/tissue.hpp"

using namespace csisense;

namespace {

thread_local std::string tl_error;

void set_error(const std::string& msg) { tl_error = msg; }

// Maps core exceptions onto status codes; the handler body runs inside.
template <typename Fn>
csn_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        set_error(e.what());
        return CSN_ERR_PARSE;
    } catch (const IoError& e) {
        set_error(e.what());
        return CSN_ERR_IO;
    } catch (const DomainError& e) {
        set_error(e.what());
        return CSN_ERR_DOMAIN;
    } catch (const std::exception& e) {
        set_error(e.what());
        return CSN_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown failure");
        return CSN_ERR_INTERNAL;
    }
}

csn_status require(bool ok, const char* what) {
    if (!ok) {
        set_error(std::string("invalid argument: ") + what);
        return CSN_ERR_INVALID_ARGUMENT;
    }
    return CSN_OK;
}

PipelineConfig pipeline_from(const char* json_or_null) {
    if (!json_or_null || !*json_or_null) return PipelineConfig{};
    return PipelineConfig::from_json(json_or_null);
}

}  // namespace

struct csn_dataset {
    LabeledDataset data;
    SynthConfig synth;  // provenance for manifests and radar truth
};

struct csn_model {
    CsiNet net;
    PipelineConfig cfg;
    TrainLog log;
    bool trained = false;
};

extern "C" {

void csn_version(int* major, int* minor, int* patch) {
    if (major) *major = 1;
    if (minor) *minor = 0;
    if (patch) *patch = 0;
}

int csn_abi_version(void) { return CSN_ABI_VERSION; }

const char* csn_last_error(void) { return tl_error.c_str(); }

void csn_set_threads(int n) { set_num_threads(n); }

void csn_string_free(char* s) { std::free(s); }

csn_status csn_wave_speed(double rel_permittivity, double rel_permeability, double* out_mps) {
    if (csn_status s = require(out_mps != nullptr, "out_mps"); s != CSN_OK) return s;
    return guarded([&] {
        TissueLayer layer;
        layer.name = "query";
        layer.rel_permittivity = rel_permittivity;
        layer.rel_permeability = rel_permeability;
        layer.thickness = 1.0;
        layer.validate();
        *out_mps = wave_speed(layer);
        return CSN_OK;
    });
}

csn_status csn_doppler_shift(double carrier_hz, double object_speed_mps, double wave_speed_mps,
                             int approaching, double* out_hz) {
    if (csn_status s = require(out_hz != nullptr, "out_hz"); s != CSN_OK) return s;
    return guarded([&] {
        *out_hz = doppler_shift(carrier_hz, object_speed_mps, wave_speed_mps, approaching != 0);
        return CSN_OK;
    });
}

csn_status csn_phase_variation(double distance_m, double wavelength_m, double* out_rad) {
    if (csn_status s = require(out_rad != nullptr, "out_rad"); s != CSN_OK) return s;
    return guarded([&] {
        *out_rad = phase_variation(distance_m, wavelength_m);
        return CSN_OK;
    });
}

csn_status csn_dataset_synth(const char* synth_config_json, const char* task, csn_dataset** out) {
    if (csn_status s = require(out && task, "dataset_synth arguments"); s != CSN_OK) return s;
    return guarded([&] {
        auto ds = std::make_unique<csn_dataset>();
        ds->synth = (synth_config_json && *synth_config_json)
                        ? SynthConfig::from_json(synth_config_json)
                        : SynthConfig{};
        ds->data = synth_dataset(ds->synth, task);
        *out = ds.release();
        return CSN_OK;
    });
}

csn_status csn_dataset_open_dir(const char* dir, csn_dataset** out) {
    if (csn_status s = require(out && dir, "dataset_open_dir arguments"); s != CSN_OK) return s;
    return guarded([&] {
        auto ds = std::make_unique<csn_dataset>();
        ds->data = load_dataset_dir(dir);
        *out = ds.release();
        return CSN_OK;
    });
}

csn_status csn_dataset_open_file(const char* path, csn_dataset** out) {
    if (csn_status s = require(out && path, "dataset_open_file arguments"); s != CSN_OK) return s;
    return guarded([&] {
        auto ds = std::make_unique<csn_dataset>();
        ds->data.sequences.push_back(read_dataset(path));
        *out = ds.release();
        return CSN_OK;
    });
}

void csn_dataset_free(csn_dataset* ds) { delete ds; }

csn_status csn_dataset_n_sequences(const csn_dataset* ds, int32_t* out) {
    if (csn_status s = require(ds && out, "dataset_n_sequences arguments"); s != CSN_OK) return s;
    *out = static_cast<int32_t>(ds->data.sequences.size());
    return CSN_OK;
}

csn_status csn_dataset_sequence_info(const csn_dataset* ds, int32_t index, uint32_t* n_frames,
                                     uint32_t* n_subcarriers, double* sample_rate,
                                     uint8_t* label_kind, uint32_t* class_id, float bio[4]) {
    if (csn_status s = require(ds != nullptr, "dataset handle"); s != CSN_OK) return s;
    return guarded([&] {
        if (index < 0 || index >= static_cast<int32_t>(ds->data.sequences.size()))
            throw DomainError("sequence index out of range");
        const CsiSequence& seq = ds->data.sequences[static_cast<size_t>(index)];
        if (n_frames) *n_frames = static_cast<uint32_t>(seq.frames.size());
        if (n_subcarriers) *n_subcarriers = seq.frames.empty() ? 0 : seq.frames.front().n_sc;
        if (sample_rate) *sample_rate = seq.sample_rate;
        if (label_kind) *label_kind = static_cast<uint8_t>(seq.label.kind);
        if (class_id) *class_id = seq.label.class_id;
        if (bio) {
            for (int i = 0; i < 4; ++i) bio[i] = seq.label.biometrics[static_cast<size_t>(i)];
        }
        return CSN_OK;
    });
}

csn_status csn_dataset_write_file(const csn_dataset* ds, int32_t index, const char* path) {
    if (csn_status s = require(ds && path, "dataset_write_file arguments"); s != CSN_OK) return s;
    return guarded([&] {
        if (index < 0 || index >= static_cast<int32_t>(ds->data.sequences.size()))
            throw DomainError("sequence index out of range");
        write_dataset(ds->data.sequences[static_cast<size_t>(index)], path);
        return CSN_OK;
    });
}

csn_status csn_dataset_filter(csn_dataset* ds, const char* filter_config_json) {
    if (csn_status s = require(ds != nullptr, "dataset handle"); s != CSN_OK) return s;
    return guarded([&] {
        FilterConfig cfg;
        if (filter_config_json && *filter_config_json) {
            PipelineConfig tmp = PipelineConfig::from_json(
                std::string("{\"filter\":") + filter_config_json + "}");
            cfg = tmp.filter;
        }
        for (auto& seq : ds->data.sequences) seq = filter_sequence(seq, cfg);
        return CSN_OK;
    });
}

csn_status csn_dataset_amplitudes(const csn_dataset* ds, int32_t index, float* buffer,
                                  size_t capacity, size_t* written) {
    if (csn_status s = require(ds && buffer, "dataset_amplitudes arguments"); s != CSN_OK)
        return s;
    return guarded([&] {
        if (index < 0 || index >= static_cast<int32_t>(ds->data.sequences.size()))
            throw DomainError("sequence index out of range");
        AmplitudeSeries series = amplitudes(ds->data.sequences[static_cast<size_t>(index)]);
        if (series.values.size() > capacity)
            throw DomainError("buffer too small: need " + std::to_string(series.values.size()));
        std::memcpy(buffer, series.values.data(), series.values.size() * sizeof(float));
        if (written) *written = series.values.size();
        return CSN_OK;
    });
}

csn_status csn_model_build(const char* pipeline_config_json, int32_t n_classes, uint64_t seed,
                           csn_model** out) {
    if (csn_status s = require(out != nullptr, "model out pointer"); s != CSN_OK) return s;
    return guarded([&] {
        PipelineConfig cfg = pipeline_from(pipeline_config_json);
        auto m = std::make_unique<csn_model>(
            csn_model{build_model_for(cfg, n_classes, seed), cfg, {}, false});
        *out = m.release();
        return CSN_OK;
    });
}

csn_status csn_model_load(const char* model_dir, csn_model** out) {
    if (csn_status s = require(out && model_dir, "model_load arguments"); s != CSN_OK) return s;
    return guarded([&] {
        std::ifstream in(std::string(model_dir) + "/model_manifest.json");
        if (!in) throw IoError(std::string("cannot open ") + model_dir + "/model_manifest.json");
        nlohmann::json manifest;
        try {
            in >> manifest;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("model manifest: ") + e.what());
        }
        PipelineConfig cfg = PipelineConfig::from_json(manifest.at("pipeline").dump());
        int n_classes = static_cast<int>(cfg.synth.subject_ids.size());
        auto m = std::make_unique<csn_model>(
            csn_model{build_model_for(cfg, n_classes, stage_seed(cfg.seed, "init")), cfg, {}, true});
        m->net.load_tensors(load_checkpoint(std::string(model_dir) + "/model.csnw"));
        if (manifest.contains("epoch_loss"))
            m->log.epoch_loss = manifest.at("epoch_loss").get<std::vector<double>>();
        *out = m.release();
        return CSN_OK;
    });
}

void csn_model_free(csn_model* m) { delete m; }

csn_status csn_model_num_params(csn_model* m, int64_t* out) {
    if (csn_status s = require(m && out, "model_num_params arguments"); s != CSN_OK) return s;
    *out = m->net.num_params();
    return CSN_OK;
}

csn_status csn_model_train(csn_model* m, const csn_dataset* data,
                           const char* pipeline_config_json) {
    if (csn_status s = require(m && data, "model_train arguments"); s != CSN_OK) return s;
    return guarded([&] {
        PipelineConfig cfg =
            pipeline_config_json && *pipeline_config_json ? pipeline_from(pipeline_config_json)
                                                          : m->cfg;
        SplitInstances split = prepare_instances(data->data, cfg.filter, cfg.augment, cfg.seed);
        TrainConfig tc = cfg.train;
        tc.seed = stage_seed(cfg.seed, "train");
        m->log = train_model(m->net, split.train, tc);
        m->cfg = cfg;
        m->trained = true;
        return CSN_OK;
    });
}

csn_status csn_model_epoch_loss(csn_model* m, int32_t epoch_index, double* out) {
    if (csn_status s = require(m && out, "model_epoch_loss arguments"); s != CSN_OK) return s;
    if (epoch_index < 0 || epoch_index >= static_cast<int32_t>(m->log.epoch_loss.size())) {
        set_error("epoch index out of range");
        return CSN_ERR_DOMAIN;
    }
    *out = m->log.epoch_loss[static_cast<size_t>(epoch_index)];
    return CSN_OK;
}

csn_status csn_model_eval(csn_model* m, const csn_dataset* data,
                          const char* pipeline_config_json, char** out_metrics_json) {
    if (csn_status s = require(m && data && out_metrics_json, "model_eval arguments"); s != CSN_OK)
        return s;
    return guarded([&] {
        if (!m->trained) throw DomainError("model has not been trained or loaded");
        PipelineConfig cfg =
            pipeline_config_json && *pipeline_config_json ? pipeline_from(pipeline_config_json)
                                                          : m->cfg;
        SplitInstances split = prepare_instances(data->data, cfg.filter, cfg.augment, cfg.seed);
        std::vector<EvalReport> reports;
        bool joint = cfg.task == "joint";
        if (cfg.task != "biometrics") {
            Task head = joint ? Task::Person : task_from_name(cfg.task);
            std::vector<int> truth;
            for (const auto& inst : split.test)
                truth.push_back(static_cast<int>(inst.label.class_id));
            auto pred = predict_classes(m->net, split.test, head);
            EvalReport rep;
            rep.task = task_name(head);
            rep.has_classification = true;
            rep.cm = confusion(truth, pred, m->net.task_config(head).output_dim);
            rep.accuracy = accuracy(rep.cm);
            reports.push_back(std::move(rep));
        }
        if (cfg.task == "biometrics" || joint) {
            auto pred = predict_biometrics(m->net, split.test);
            std::vector<std::vector<double>> truth_rows, pred_rows;
            std::vector<int> subjects;
            for (size_t i = 0; i < split.test.size(); ++i) {
                const auto& bio = split.test[i].label.biometrics;
                truth_rows.push_back({bio[0], bio[1], bio[2], bio[3]});
                pred_rows.push_back({pred[i][0], pred[i][1], pred[i][2], pred[i][3]});
                subjects.push_back(split.test[i].label.has_class()
                                       ? static_cast<int>(split.test[i].label.class_id)
                                       : 0);
            }
            EvalReport rep;
            rep.task = "biometrics";
            rep.has_regression = true;
            rep.regression = mean_average_error(truth_rows, pred_rows, subjects);
            reports.push_back(std::move(rep));
        }
        std::string json_text = reports_to_json(reports);
        char* buf = static_cast<char*>(std::malloc(json_text.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, json_text.c_str(), json_text.size() + 1);
        *out_metrics_json = buf;
        return CSN_OK;
    });
}

csn_status csn_model_predict_class(csn_model* m, const float* amplitudes, size_t n,
                                   int32_t* out_class) {
    if (csn_status s = require(m && amplitudes && out_class, "predict_class arguments");
        s != CSN_OK)
        return s;
    return guarded([&] {
        Instance inst;
        inst.amplitude.assign(amplitudes, amplitudes + n);
        Task head = m->cfg.task == "joint" ? Task::Person : task_from_name(m->cfg.task);
        auto pred = predict_classes(m->net, {inst}, head);
        *out_class = pred.front();
        return CSN_OK;
    });
}

csn_status csn_model_predict_biometrics(csn_model* m, const float* amplitudes, size_t n,
                                        double out_bio[4]) {
    if (csn_status s = require(m && amplitudes && out_bio, "predict_biometrics arguments");
        s != CSN_OK)
        return s;
    return guarded([&] {
        Instance inst;
        inst.amplitude.assign(amplitudes, amplitudes + n);
        auto pred = predict_biometrics(m->net, {inst});
        for (int i = 0; i < 4; ++i) out_bio[i] = pred.front()[static_cast<size_t>(i)];
        return CSN_OK;
    });
}

csn_status csn_model_save(csn_model* m, const char* path) {
    if (csn_status s = require(m && path, "model_save arguments"); s != CSN_OK) return s;
    return guarded([&] {
        m->net.save(path);
        return CSN_OK;
    });
}

csn_status csn_run_synth(const char* synth_config_json, const char* task, const char* out_dir) {
    if (csn_status s = require(task && out_dir, "run_synth arguments"); s != CSN_OK) return s;
    return guarded([&] {
        SynthConfig cfg = (synth_config_json && *synth_config_json)
                              ? SynthConfig::from_json(synth_config_json)
                              : SynthConfig{};
        run_synth(cfg, task, out_dir);
        return CSN_OK;
    });
}

csn_status csn_run_filter(const char* in_dir, const char* filter_config_json,
                          const char* out_dir) {
    if (csn_status s = require(in_dir && out_dir, "run_filter arguments"); s != CSN_OK) return s;
    return guarded([&] {
        FilterConfig cfg;
        if (filter_config_json && *filter_config_json) {
            PipelineConfig tmp = PipelineConfig::from_json(
                std::string("{\"filter\":") + filter_config_json + "}");
            cfg = tmp.filter;
        }
        run_filter(in_dir, cfg, out_dir);
        return CSN_OK;
    });
}

csn_status csn_run_augment(const char* in_dir, uint64_t seed, const char* out_dir) {
    if (csn_status s = require(in_dir && out_dir, "run_augment arguments"); s != CSN_OK) return s;
    return guarded([&] {
        run_augment(in_dir, seed, out_dir);
        return CSN_OK;
    });
}

csn_status csn_run_train(const char* pipeline_config_json, const char* data_dir,
                         const char* out_dir) {
    if (csn_status s = require(data_dir && out_dir, "run_train arguments"); s != CSN_OK) return s;
    return guarded([&] {
        run_train(pipeline_from(pipeline_config_json), data_dir, out_dir);
        return CSN_OK;
    });
}

csn_status csn_run_eval(const char* pipeline_config_json, const char* model_dir,
                        const char* data_dir, const char* out_dir) {
    if (csn_status s = require(model_dir && data_dir && out_dir, "run_eval arguments");
        s != CSN_OK)
        return s;
    return guarded([&] {
        run_eval(pipeline_from(pipeline_config_json), model_dir, data_dir, out_dir);
        return CSN_OK;
    });
}

csn_status csn_run_report(const char* metrics_json_path, const char* out_dir) {
    if (csn_status s = require(metrics_json_path && out_dir, "run_report arguments"); s != CSN_OK)
        return s;
    return guarded([&] {
        export_from_metrics(metrics_json_path, out_dir);
        return CSN_OK;
    });
}

csn_status csn_run_e2e(const char* pipeline_config_json, const char* out_dir, int* out_passed) {
    if (csn_status s = require(out_dir != nullptr, "run_e2e arguments"); s != CSN_OK) return s;
    return guarded([&] {
        E2eResult result = run_e2e(pipeline_from(pipeline_config_json), out_dir);
        if (out_passed) *out_passed = result.passed ? 1 : 0;
        if (!result.passed) set_error(result.failure);
        return CSN_OK;
    });
}

} /* extern "C" */
