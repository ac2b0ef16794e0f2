// Command-line driver for the csisense shared library. Everything below
// talks to the library through the C interface in csisense.h.

#include <csisense.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

using nlohmann::json;

namespace {

// Exit codes: 0 success (and e2e thresholds passed), 1 thresholds failed,
// 2 missing/unreadable path, 3 parse failure, 4 bad value, 5 internal.
int exit_code_for(csn_status s) {
    switch (s) {
        case CSN_OK: return 0;
        case CSN_ERR_IO: return 2;
        case CSN_ERR_PARSE: return 3;
        case CSN_ERR_INVALID_ARGUMENT:
        case CSN_ERR_DOMAIN: return 4;
        default: return 5;
    }
}

int fail(csn_status s) {
    std::fprintf(stderr, "error: %s\n", csn_last_error());
    return exit_code_for(s);
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "error: cannot open config file: %s\n", path.c_str());
        std::exit(2);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: config file %s: %s\n", path.c_str(), e.what());
        std::exit(3);
    }
    return j;
}

std::vector<int> default_subjects(const std::string& task) {
    if (task == "falling") return {1, 22};
    if (task == "sign") return {1, 3, 6, 8, 10, 16, 20, 22, 25, 29};
    return {1, 3, 8, 16, 22};
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::string task = "person";
    std::string variant = "tc";
    std::string scale = "desk";
    uint64_t seed = 1;
    bool seed_set = false;
    int threads = 0;
    std::vector<int> subjects;
    int frames = 0;
    bool no_augment = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_model_flags = true) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed", f.seed, "global seed, fanned out per stage")
        ->each([&f](const std::string&) { f.seed_set = true; });
    cmd->add_option("--threads", f.threads,
                    "worker threads (default: CSI_SENSE_THREADS or hardware)");
    if (with_model_flags) {
        cmd->add_option("--task", f.task, "biometrics|person|sign|falling|joint");
        cmd->add_option("--variant", f.variant, "generation stage: tc|interp|hybrid");
        cmd->add_option("--scale", f.scale, "model scale: desk|paper");
        cmd->add_option("--subjects", f.subjects, "bundled subject ids used as classes");
        cmd->add_option("--frames", f.frames, "frames per subject");
        cmd->add_flag("--no-augment", f.no_augment, "skip training-set augmentation");
    }
}

// Config file merged with command-line overrides.
json pipeline_json(const CommonFlags& f, const CLI::App* cmd) {
    json cfg = load_config_file(f.config_path);
    if (cmd->count("--task") || !cfg.contains("task")) cfg["task"] = f.task;
    if (cmd->count("--variant") || !cfg.contains("variant")) cfg["variant"] = f.variant;
    if (cmd->count("--scale") || !cfg.contains("scale")) cfg["scale"] = f.scale;
    if (f.seed_set || !cfg.contains("seed")) cfg["seed"] = f.seed;
    if (f.no_augment) cfg["augment"] = false;
    if (!cfg.contains("synth")) cfg["synth"] = json::object();
    if (cmd->count("--subjects"))
        cfg["synth"]["subject_ids"] = f.subjects;
    else if (!cfg["synth"].contains("subject_ids"))
        cfg["synth"]["subject_ids"] = default_subjects(cfg["task"].get<std::string>());
    if (cmd->count("--frames"))
        cfg["synth"]["frames_per_subject"] = f.frames;
    return cfg;
}

void apply_threads(const CommonFlags& f) {
    if (f.threads > 0) csn_set_threads(f.threads);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"csisense: synthesize, process, train and evaluate WiFi CSI"};
    app.require_subcommand(1);

    int vmaj, vmin, vpat;
    csn_version(&vmaj, &vmin, &vpat);
    app.set_version_flag("--version", std::to_string(vmaj) + "." + std::to_string(vmin) + "." +
                                          std::to_string(vpat));

    CommonFlags synth_f, filter_f, augment_f, train_f, eval_f, report_f, e2e_f;
    std::string in_dir, model_dir, data_dir, metrics_path;

    auto* synth = app.add_subcommand("synth", "synthesize a labeled CSI dataset");
    add_common(synth, synth_f);

    auto* filter = app.add_subcommand("filter", "denoise a dataset directory");
    add_common(filter, filter_f, false);
    filter->add_option("--in", in_dir, "input dataset directory")->required();

    auto* augment = app.add_subcommand("augment", "augment a dataset by group averaging");
    add_common(augment, augment_f, false);
    augment->add_option("--in", in_dir, "input dataset directory")->required();

    auto* train = app.add_subcommand("train", "train a model on a dataset directory");
    add_common(train, train_f);
    train->add_option("--data", data_dir, "dataset directory")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a trained model");
    add_common(eval, eval_f);
    eval->add_option("--model", model_dir, "model directory (model.csnw + manifest)")->required();
    eval->add_option("--data", data_dir, "dataset directory")->required();

    auto* report = app.add_subcommand("report", "regenerate exports from metrics.json");
    add_common(report, report_f, false);
    report->add_option("--metrics", metrics_path, "metrics.json path")->required();

    auto* e2e = app.add_subcommand("e2e", "run the whole pipeline and check thresholds");
    add_common(e2e, e2e_f);

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        apply_threads(synth_f);
        json cfg = pipeline_json(synth_f, synth);
        json sy = cfg["synth"];
        if (synth_f.seed_set || !sy.contains("seed")) sy["seed"] = synth_f.seed;
        csn_status s = csn_run_synth(sy.dump().c_str(), cfg["task"].get<std::string>().c_str(),
                                     synth_f.out_dir.c_str());
        if (s != CSN_OK) return fail(s);
        std::printf("wrote dataset to %s\n", synth_f.out_dir.c_str());
        return 0;
    }
    if (filter->parsed()) {
        apply_threads(filter_f);
        json cfg = load_config_file(filter_f.config_path);
        std::string filter_json = cfg.contains("filter") ? cfg["filter"].dump() : "";
        csn_status s = csn_run_filter(in_dir.c_str(), filter_json.c_str(), filter_f.out_dir.c_str());
        if (s != CSN_OK) return fail(s);
        std::printf("wrote filtered dataset to %s\n", filter_f.out_dir.c_str());
        return 0;
    }
    if (augment->parsed()) {
        apply_threads(augment_f);
        csn_status s = csn_run_augment(in_dir.c_str(), augment_f.seed, augment_f.out_dir.c_str());
        if (s != CSN_OK) return fail(s);
        std::printf("wrote augmented dataset to %s\n", augment_f.out_dir.c_str());
        return 0;
    }
    if (train->parsed()) {
        apply_threads(train_f);
        json cfg = pipeline_json(train_f, train);
        csn_status s = csn_run_train(cfg.dump().c_str(), data_dir.c_str(), train_f.out_dir.c_str());
        if (s != CSN_OK) return fail(s);
        std::printf("wrote model to %s\n", train_f.out_dir.c_str());
        return 0;
    }
    if (eval->parsed()) {
        apply_threads(eval_f);
        json cfg = pipeline_json(eval_f, eval);
        csn_status s = csn_run_eval(cfg.dump().c_str(), model_dir.c_str(), data_dir.c_str(),
                                    eval_f.out_dir.c_str());
        if (s != CSN_OK) return fail(s);
        std::printf("wrote metrics to %s\n", eval_f.out_dir.c_str());
        return 0;
    }
    if (report->parsed()) {
        apply_threads(report_f);
        csn_status s = csn_run_report(metrics_path.c_str(), report_f.out_dir.c_str());
        if (s != CSN_OK) return fail(s);
        std::printf("wrote report exports to %s\n", report_f.out_dir.c_str());
        return 0;
    }
    if (e2e->parsed()) {
        apply_threads(e2e_f);
        json cfg = pipeline_json(e2e_f, e2e);
        int passed = 0;
        csn_status s = csn_run_e2e(cfg.dump().c_str(), e2e_f.out_dir.c_str(), &passed);
        if (s != CSN_OK) return fail(s);

        // Mirror the summary table on stdout.
        std::ifstream summary(e2e_f.out_dir + "/summary.txt");
        if (summary) {
            std::stringstream buf;
            buf << summary.rdbuf();
            std::printf("%s", buf.str().c_str());
        }
        if (!passed) {
            std::fprintf(stderr, "thresholds not met: %s\n", csn_last_error());
            return 1;
        }
        std::printf("all thresholds passed\n");
        return 0;
    }
    return 0;
}
