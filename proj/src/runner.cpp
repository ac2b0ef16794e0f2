#include "csisense/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "csisense/augment.hpp"
#include "csisense/errors.hpp"
#include "csisense/filters.hpp"
#include "csisense/naive_bayes.hpp"
#include "csisense/rng.hpp"
#include "csisense/synth.hpp"

namespace csisense {

using nlohmann::json;

namespace fs = std::filesystem;

namespace {

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

uint64_t hash_dataset(const LabeledDataset& ds) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const void* p, size_t n) {
        h ^= fnv1a64(p, n);
        h *= 0x100000001b3ull;
    };
    for (const auto& seq : ds.sequences) {
        uint8_t kind = static_cast<uint8_t>(seq.label.kind);
        mix(&kind, 1);
        mix(&seq.label.class_id, sizeof(seq.label.class_id));
        mix(seq.label.biometrics.data(), sizeof(float) * 4);
        for (const auto& f : seq.frames) mix(f.values.data(), f.values.size() * sizeof(f.values[0]));
    }
    return h;
}

}  // namespace

void SynthConfig::validate() const {
    if (tx_rx_distance_m <= 0) throw DomainError("tx_rx_distance_m must be > 0");
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    if (n_subcarriers < 1) throw DomainError("n_subcarriers must be >= 1");
    if (sample_rate_hz <= 0) throw DomainError("sample_rate_hz must be > 0");
    if (noise_sigma < 0) throw DomainError("noise_sigma must be >= 0");
    if (subject_ids.empty()) throw DomainError("subject_ids must not be empty");
    if (frames_per_subject < 5) throw DomainError("frames_per_subject must be >= 5");
}

std::string SynthConfig::to_json() const {
    json j;
    j["band"] = band_name(band);
    j["tx_rx_distance_m"] = tx_rx_distance_m;
    j["n_paths"] = n_paths;
    j["subcarrier_center_hz"] = subcarrier_center_hz;
    j["subcarrier_spacing_hz"] = subcarrier_spacing_hz;
    j["n_subcarriers"] = n_subcarriers;
    j["sample_rate_hz"] = sample_rate_hz;
    j["noise_sigma"] = noise_sigma;
    j["seed"] = seed;
    j["subject_ids"] = subject_ids;
    j["frames_per_subject"] = frames_per_subject;
    return j.dump(2);
}

SynthConfig SynthConfig::from_json(const std::string& text) {
    json j = parse_json(text, "synthesis config");
    SynthConfig c;
    c.band = band_from_name(j.value("band", std::string("5GHz")));
    c.tx_rx_distance_m = j.value("tx_rx_distance_m", c.tx_rx_distance_m);
    c.n_paths = j.value("n_paths", c.n_paths);
    c.subcarrier_center_hz = j.value("subcarrier_center_hz", c.subcarrier_center_hz);
    c.subcarrier_spacing_hz = j.value("subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    c.n_subcarriers = j.value("n_subcarriers", c.n_subcarriers);
    c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.seed = j.value("seed", c.seed);
    if (j.contains("subject_ids")) c.subject_ids = j.at("subject_ids").get<std::vector<int>>();
    c.frames_per_subject = j.value("frames_per_subject", c.frames_per_subject);
    c.validate();
    return c;
}

namespace {

json filter_to_json(const FilterConfig& f) {
    json j;
    j["enabled"] = f.enabled;
    j["median_window"] = f.median_window;
    j["mean_window"] = f.mean_window;
    j["butterworth_order"] = f.butterworth_order;
    j["butterworth_cutoff_hz"] = f.butterworth_cutoff_hz;
    return j;
}

FilterConfig filter_from_json(const json& j) {
    FilterConfig f;
    f.enabled = j.value("enabled", f.enabled);
    f.median_window = j.value("median_window", f.median_window);
    f.mean_window = j.value("mean_window", f.mean_window);
    f.butterworth_order = j.value("butterworth_order", f.butterworth_order);
    f.butterworth_cutoff_hz = j.value("butterworth_cutoff_hz", f.butterworth_cutoff_hz);
    return f;
}

}  // namespace

std::string PipelineConfig::to_json() const {
    json j;
    j["synth"] = json::parse(synth.to_json());
    j["filter"] = filter_to_json(filter);
    j["augment"] = augment;
    j["task"] = task;
    j["variant"] = variant;
    j["scale"] = scale;
    j["train"] = {{"epochs", train.epochs},
                  {"minibatch", train.minibatch},
                  {"initial_lr", train.initial_lr},
                  {"milestones", train.milestones},
                  {"lr_decay", train.lr_decay}};
    j["seed"] = seed;
    j["min_accuracy"] = min_accuracy;
    j["max_mae"] = max_mae;
    j["require_beat_naive_bayes"] = require_beat_naive_bayes;
    return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j = parse_json(text, "pipeline config");
    PipelineConfig c;
    if (j.contains("synth")) c.synth = SynthConfig::from_json(j.at("synth").dump());
    if (j.contains("filter")) c.filter = filter_from_json(j.at("filter"));
    c.augment = j.value("augment", c.augment);
    c.task = j.value("task", c.task);
    c.variant = j.value("variant", c.variant);
    c.scale = j.value("scale", c.scale);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.minibatch = t.value("minibatch", c.train.minibatch);
        c.train.initial_lr = t.value("initial_lr", c.train.initial_lr);
        if (t.contains("milestones"))
            c.train.milestones = t.at("milestones").get<std::vector<int>>();
        c.train.lr_decay = t.value("lr_decay", c.train.lr_decay);
    }
    c.seed = j.value("seed", c.seed);
    c.min_accuracy = j.value("min_accuracy", c.min_accuracy);
    c.max_mae = j.value("max_mae", c.max_mae);
    c.require_beat_naive_bayes = j.value("require_beat_naive_bayes", c.require_beat_naive_bayes);
    // One seed drives every stage unless the synthesis block pins its own.
    if (!j.contains("synth") || !j.at("synth").contains("seed"))
        c.synth.seed = stage_seed(c.seed, "synth");
    gen_mode_from_name(c.variant);
    scale_from_name(c.scale);
    task_from_name(c.task == "joint" ? "person" : c.task);
    return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    return from_json(read_text(path));
}

LabeledDataset synth_dataset(const SynthConfig& cfg, const std::string& task) {
    cfg.validate();
    SynthGeometry geom;
    geom.tx_rx_distance = cfg.tx_rx_distance_m;
    geom.n_paths = cfg.n_paths;
    auto subcarriers =
        make_subcarriers(cfg.subcarrier_center_hz, cfg.subcarrier_spacing_hz, cfg.n_subcarriers);

    bool wants_bio = task == "biometrics" || task == "joint";
    bool wants_class = task != "biometrics";

    LabeledDataset ds;
    for (size_t cls = 0; cls < cfg.subject_ids.size(); ++cls) {
        const SubjectProfile& subject = subject_by_id(cfg.subject_ids[cls]);
        BodyModel body = subject_to_body(subject, cfg.band);
        uint64_t class_seed = stage_seed(cfg.seed, "synth.class") ^
                              (0x9e3779b97f4a7c15ull * (cls + 1));
        CsiSequence seq = synth_csi(body, geom, subcarriers, cfg.frames_per_subject,
                                    cfg.noise_sigma, class_seed, cfg.sample_rate_hz);
        if (wants_bio && wants_class)
            seq.label = Label::of_class_and_biometrics(static_cast<uint32_t>(cls),
                                                       subject.biometrics());
        else if (wants_bio)
            seq.label = Label::of_biometrics(subject.biometrics());
        else
            seq.label = Label::of_class(static_cast<uint32_t>(cls));
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

void save_dataset_dir(const LabeledDataset& ds, const SynthConfig& cfg, const std::string& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "csisense dataset v1";
    manifest["synth"] = json::parse(cfg.to_json());
    manifest["files"] = json::array();
    for (size_t i = 0; i < ds.sequences.size(); ++i) {
        int subject = i < cfg.subject_ids.size() ? cfg.subject_ids[i] : -1;
        std::string name =
            "class_" + std::to_string(i) + "_subject_" + std::to_string(subject) + ".csi1";
        write_dataset(ds.sequences[i], dir + "/" + name);
        manifest["files"].push_back(name);
    }
    manifest["data_hash"] = hash_dataset(ds);
    write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
}

LabeledDataset load_dataset_dir(const std::string& dir) {
    if (!fs::exists(dir)) throw IoError("dataset directory does not exist: " + dir);
    LabeledDataset ds;
    std::vector<std::string> files;
    if (fs::exists(dir + "/manifest.json")) {
        json manifest = parse_json(read_text(dir + "/manifest.json"), "dataset manifest");
        for (const auto& f : manifest.at("files")) files.push_back(dir + "/" + f.get<std::string>());
    } else {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".csi1") files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw IoError("no .csi1 files under " + dir);
    for (const auto& f : files) ds.sequences.push_back(read_dataset(f));
    return ds;
}

CsiSequence filter_sequence(const CsiSequence& seq, const FilterConfig& cfg) {
    AmplitudeSeries series = amplitudes(seq);
    if (cfg.enabled) {
        series = median_filter(series, cfg.median_window);
        series = mean_filter(series, cfg.mean_window);
        series = butterworth_lowpass(series, cfg.butterworth_order, cfg.butterworth_cutoff_hz);
    }
    return to_sequence(series);
}

SplitInstances prepare_instances(const LabeledDataset& ds, const FilterConfig& filter,
                                 bool do_augment, uint64_t seed) {
    SplitInstances out;
    for (size_t cls = 0; cls < ds.sequences.size(); ++cls) {
        AmplitudeSeries series = amplitudes(ds.sequences[cls]);
        if (filter.enabled) {
            series = median_filter(series, filter.median_window);
            series = mean_filter(series, filter.mean_window);
            series = butterworth_lowpass(series, filter.butterworth_order,
                                         filter.butterworth_cutoff_hz);
        }
        auto instances = to_instances(series);
        auto [train, test] = split_train_test(instances);
        out.train_raw.insert(out.train_raw.end(), train.begin(), train.end());
        if (do_augment) {
            uint64_t class_seed =
                stage_seed(seed, "augment") ^ (0x9e3779b97f4a7c15ull * (cls + 1));
            auto augmented = augment(train, class_seed);
            out.train.insert(out.train.end(), augmented.begin(), augmented.end());
        } else {
            out.train.insert(out.train.end(), train.begin(), train.end());
        }
        out.test.insert(out.test.end(), test.begin(), test.end());
    }
    return out;
}

std::vector<TaskConfig> heads_for_task(const std::string& task, int n_classes) {
    std::vector<TaskConfig> heads;
    if (task == "joint") {
        heads.push_back(TaskConfig::make(Task::Biometrics));
        TaskConfig person = TaskConfig::make(Task::Person);
        person.output_dim = n_classes;
        heads.push_back(person);
        return heads;
    }
    TaskConfig c = TaskConfig::make(task_from_name(task));
    if (!c.is_regression()) c.output_dim = n_classes;
    heads.push_back(c);
    return heads;
}

CsiNet build_model_for(const PipelineConfig& cfg, int n_classes, uint64_t seed) {
    GenMode mode = gen_mode_from_name(cfg.variant);
    ModelScale scale = scale_from_name(cfg.scale);
    int feature_dim = (cfg.task == "sign" || cfg.task == "falling") ? 128 : 256;
    auto gen = GenerationConfig::make(mode, scale);
    auto backbone = BackboneConfig::make(scale, feature_dim);
    return CsiNet::build(gen, backbone, heads_for_task(cfg.task, n_classes), seed);
}

void run_synth(const SynthConfig& cfg, const std::string& task, const std::string& out_dir) {
    LabeledDataset ds = synth_dataset(cfg, task);
    save_dataset_dir(ds, cfg, out_dir);
}

void run_filter(const std::string& in_dir, const FilterConfig& cfg, const std::string& out_dir) {
    LabeledDataset ds = load_dataset_dir(in_dir);
    fs::create_directories(out_dir);
    json manifest;
    manifest["format"] = "csisense dataset v1";
    manifest["filtered"] = true;
    manifest["files"] = json::array();
    for (size_t i = 0; i < ds.sequences.size(); ++i) {
        std::string name = "filtered_class_" + std::to_string(i) + ".csi1";
        write_dataset(filter_sequence(ds.sequences[i], cfg), out_dir + "/" + name);
        manifest["files"].push_back(name);
    }
    write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void run_augment(const std::string& in_dir, uint64_t seed, const std::string& out_dir) {
    LabeledDataset ds = load_dataset_dir(in_dir);
    fs::create_directories(out_dir);
    json manifest;
    manifest["format"] = "csisense dataset v1";
    manifest["augmented"] = true;
    manifest["seed"] = seed;
    manifest["files"] = json::array();
    for (size_t cls = 0; cls < ds.sequences.size(); ++cls) {
        auto instances = to_instances(amplitudes(ds.sequences[cls]));
        uint64_t class_seed = stage_seed(seed, "augment") ^ (0x9e3779b97f4a7c15ull * (cls + 1));
        auto augmented = augment(instances, class_seed);
        AmplitudeSeries series;
        series.n_channels = augmented.front().amplitude.size();
        series.sample_rate = ds.sequences[cls].sample_rate;
        series.label = ds.sequences[cls].label;
        for (const auto& inst : augmented)
            series.values.insert(series.values.end(), inst.amplitude.begin(),
                                 inst.amplitude.end());
        std::string name = "augmented_class_" + std::to_string(cls) + ".csi1";
        write_dataset(to_sequence(series), out_dir + "/" + name);
        manifest["files"].push_back(name);
    }
    write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

namespace {

// Shared by run_train / run_e2e: trains and persists model + manifest.
struct TrainedModel {
    CsiNet net;
    TrainLog log;
    uint64_t data_hash = 0;
};

TrainedModel train_on(const PipelineConfig& cfg, const LabeledDataset& ds,
                      const SplitInstances& split) {
    int n_classes = static_cast<int>(ds.sequences.size());
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = stage_seed(cfg.seed, "train");
    TrainedModel tm{build_model_for(cfg, n_classes, stage_seed(cfg.seed, "init")), {}, 0};
    tm.log = train_model(tm.net, split.train, train_cfg);
    tm.data_hash = hash_dataset(ds);
    return tm;
}

void persist_model(const PipelineConfig& cfg, TrainedModel& tm, const std::string& out_dir) {
    fs::create_directories(out_dir);
    tm.net.save(out_dir + "/model.csnw");
    json manifest;
    manifest["format"] = "csisense model manifest v1";
    manifest["pipeline"] = json::parse(cfg.to_json());
    manifest["data_hash"] = tm.data_hash;
    manifest["seed"] = cfg.seed;
    manifest["bio_min"] = tm.net.bio_min();
    manifest["bio_max"] = tm.net.bio_max();
    manifest["epoch_loss"] = tm.log.epoch_loss;
    manifest["num_params"] = tm.net.num_params();
    write_text(out_dir + "/model_manifest.json", manifest.dump(2) + "\n");
}

std::vector<EvalReport> evaluate(const PipelineConfig& cfg, CsiNet& net,
                                 const SplitInstances& split, const SynthConfig& synth) {
    std::vector<EvalReport> reports;
    bool joint = cfg.task == "joint";
    bool classification = cfg.task != "biometrics";
    bool regression = cfg.task == "biometrics" || joint;

    if (classification) {
        Task head = joint ? Task::Person : task_from_name(cfg.task);
        std::vector<int> truth;
        for (const auto& inst : split.test) truth.push_back(static_cast<int>(inst.label.class_id));
        auto pred = predict_classes(net, split.test, head);
        int n_classes = net.task_config(head).output_dim;

        EvalReport rep;
        rep.task = task_name(head);
        rep.has_classification = true;
        rep.cm = confusion(truth, pred, n_classes);
        rep.accuracy = accuracy(rep.cm);
        auto nb = GaussianNaiveBayes::fit(split.train_raw);
        auto nb_pred = nb.predict(split.test);
        rep.baseline_accuracy = accuracy(confusion(truth, nb_pred, n_classes));
        reports.push_back(std::move(rep));
    }
    if (regression) {
        auto pred = predict_biometrics(net, split.test);
        std::vector<std::vector<double>> truth_rows, pred_rows;
        std::vector<int> subject_rows;
        for (size_t i = 0; i < split.test.size(); ++i) {
            const auto& bio = split.test[i].label.biometrics;
            truth_rows.push_back({bio[0], bio[1], bio[2], bio[3]});
            pred_rows.push_back({pred[i][0], pred[i][1], pred[i][2], pred[i][3]});
            subject_rows.push_back(split.test[i].label.has_class()
                                       ? static_cast<int>(split.test[i].label.class_id)
                                       : 0);
        }
        EvalReport rep;
        rep.task = "biometrics";
        rep.has_regression = true;
        rep.regression = mean_average_error(truth_rows, pred_rows, subject_rows);

        // Radar rows: per class, mean estimate vs truth, named by subject id.
        for (size_t cls = 0; cls < synth.subject_ids.size(); ++cls) {
            RadarRow row;
            row.subject = synth.subject_ids[cls];
            const auto& subject = subject_by_id(row.subject);
            row.truth = {subject.fat_rate, subject.muscle_rate, subject.water_rate,
                         subject.bone_rate};
            size_t count = 0;
            for (size_t i = 0; i < split.test.size(); ++i) {
                if (subject_rows[i] != static_cast<int>(cls)) continue;
                for (int b = 0; b < 4; ++b)
                    row.estimated[static_cast<size_t>(b)] += pred_rows[i][static_cast<size_t>(b)];
                ++count;
            }
            if (count > 0) {
                for (auto& v : row.estimated) v /= static_cast<double>(count);
            }
            rep.radar.push_back(row);
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace

void run_train(const PipelineConfig& cfg, const std::string& data_dir,
               const std::string& out_dir) {
    LabeledDataset ds = load_dataset_dir(data_dir);
    SplitInstances split = prepare_instances(ds, cfg.filter, cfg.augment, cfg.seed);
    TrainedModel tm = train_on(cfg, ds, split);
    persist_model(cfg, tm, out_dir);
}

std::vector<EvalReport> run_eval(const PipelineConfig&, const std::string& model_dir,
                                 const std::string& data_dir, const std::string& out_dir) {
    json manifest =
        parse_json(read_text(model_dir + "/model_manifest.json"), "model manifest");
    PipelineConfig cfg = PipelineConfig::from_json(manifest.at("pipeline").dump());

    LabeledDataset ds = load_dataset_dir(data_dir);
    // Augmentation only alters the training side; evaluation needs the raw
    // split, so skip the extra work here.
    SplitInstances split = prepare_instances(ds, cfg.filter, false, cfg.seed);
    CsiNet net =
        build_model_for(cfg, static_cast<int>(ds.sequences.size()), stage_seed(cfg.seed, "init"));
    net.load_tensors(load_checkpoint(model_dir + "/model.csnw"));
    auto reports = evaluate(cfg, net, split, cfg.synth);
    export_report(reports, out_dir);
    return reports;
}

E2eResult run_e2e(const PipelineConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_text(out_dir + "/config.json", cfg.to_json() + "\n");

    LabeledDataset ds = synth_dataset(cfg.synth, cfg.task);
    save_dataset_dir(ds, cfg.synth, out_dir + "/dataset");
    SplitInstances split = prepare_instances(ds, cfg.filter, cfg.augment, cfg.seed);
    TrainedModel tm = train_on(cfg, ds, split);
    persist_model(cfg, tm, out_dir);

    E2eResult result;
    result.epoch_loss = tm.log.epoch_loss;
    result.reports = evaluate(cfg, tm.net, split, cfg.synth);
    export_report(result.reports, out_dir);

    result.passed = true;
    for (const auto& rep : result.reports) {
        if (rep.has_classification) {
            result.accuracy = rep.accuracy;
            result.nb_accuracy = rep.baseline_accuracy;
            if (rep.accuracy < cfg.min_accuracy) {
                result.passed = false;
                result.failure = "accuracy " + std::to_string(rep.accuracy) +
                                 " below threshold " + std::to_string(cfg.min_accuracy);
            }
            if (cfg.require_beat_naive_bayes && rep.accuracy < rep.baseline_accuracy) {
                result.passed = false;
                result.failure = "accuracy below the naive Bayes baseline";
            }
        }
        if (rep.has_regression) {
            result.mae = rep.regression.mae;
            if (rep.regression.mae > cfg.max_mae) {
                result.passed = false;
                result.failure = "mAE " + std::to_string(rep.regression.mae) +
                                 " above threshold " + std::to_string(cfg.max_mae);
            }
        }
    }

    json summary;
    summary["passed"] = result.passed;
    if (result.accuracy >= 0) summary["accuracy"] = result.accuracy;
    if (result.nb_accuracy >= 0) summary["naive_bayes_accuracy"] = result.nb_accuracy;
    if (result.mae >= 0) summary["mae"] = result.mae;
    if (!result.failure.empty()) summary["failure"] = result.failure;
    summary["epoch_loss"] = result.epoch_loss;
    write_text(out_dir + "/e2e_result.json", summary.dump(2) + "\n");
    return result;
}

}  // namespace csisense
