#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "csisense/augment.hpp"
#include "csisense/runner.hpp"

using namespace csisense;

namespace {

namespace fs = std::filesystem;

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("synthesized dataset bookkeeping") {
    SynthConfig cfg;
    cfg.subject_ids = {1, 3, 8, 16, 22};
    cfg.frames_per_subject = 50;
    cfg.seed = 21;

    auto base = fs::temp_directory_path() / "csisense_runner_synth";
    fs::remove_all(base);
    run_synth(cfg, "person", base.string());

    SUBCASE("one file per subject with the requested frames and rate") {
        int count = 0;
        for (const auto& entry : fs::directory_iterator(base)) {
            if (entry.path().extension() != ".csi1") continue;
            ++count;
            auto seq = read_dataset(entry.path().string());
            CHECK(seq.frames.size() == 50);
            CHECK(seq.frames.front().n_sc == 30);
            CHECK(seq.sample_rate == 100.0);  // default sampling rate in the header
        }
        CHECK(count == 5);
        CHECK(fs::exists(base / "manifest.json"));
    }

    SUBCASE("identical config and seed give byte-identical files") {
        auto again = fs::temp_directory_path() / "csisense_runner_synth2";
        fs::remove_all(again);
        run_synth(cfg, "person", again.string());
        for (const auto& entry : fs::directory_iterator(base)) {
            if (entry.path().extension() != ".csi1") continue;
            CHECK(read_bytes(entry.path()) == read_bytes(again / entry.path().filename()));
        }
        fs::remove_all(again);
    }

    SUBCASE("labels follow the task") {
        auto ds_person = synth_dataset(cfg, "person");
        CHECK(ds_person.sequences[0].label.kind == LabelKind::ClassId);
        CHECK(ds_person.sequences[2].label.class_id == 2);

        auto ds_bio = synth_dataset(cfg, "biometrics");
        CHECK(ds_bio.sequences[0].label.kind == LabelKind::Biometrics);
        CHECK(ds_bio.sequences[0].label.biometrics[0] == 5.0f);  // subject 1 fat rate

        auto ds_joint = synth_dataset(cfg, "joint");
        CHECK(ds_joint.sequences[1].label.kind == LabelKind::ClassAndBiometrics);
        CHECK(ds_joint.sequences[1].label.class_id == 1);
    }

    fs::remove_all(base);
}

TEST_CASE("prepared instances split and augment per class") {
    SynthConfig cfg;
    cfg.subject_ids = {1, 22};
    cfg.frames_per_subject = 50;
    cfg.seed = 3;
    auto ds = synth_dataset(cfg, "person");
    FilterConfig filter;

    auto plain = prepare_instances(ds, filter, false, 7);
    CHECK(plain.train.size() == 2 * 40);
    CHECK(plain.train_raw.size() == plain.train.size());
    CHECK(plain.test.size() == 2 * 10);

    auto augmented = prepare_instances(ds, filter, true, 7);
    CHECK(augmented.train.size() == 2 * augmented_size(40));
    CHECK(augmented.train_raw.size() == 2 * 40);
    CHECK(augmented.test.size() == plain.test.size());

    // Test side must be the chronological tail, untouched by augmentation.
    for (size_t i = 0; i < plain.test.size(); ++i) {
        REQUIRE(augmented.test[i].amplitude.size() == plain.test[i].amplitude.size());
        for (size_t j = 0; j < plain.test[i].amplitude.size(); ++j)
            CHECK(augmented.test[i].amplitude[j] == plain.test[i].amplitude[j]);
    }
}

TEST_CASE("pipeline config json round trip") {
    PipelineConfig cfg;
    cfg.task = "joint";
    cfg.variant = "hybrid";
    cfg.scale = "desk";
    cfg.seed = 77;
    cfg.augment = false;
    cfg.train.epochs = 3;
    cfg.synth.subject_ids = {1, 2, 3};
    cfg.synth.noise_sigma = 2.5e-4;

    auto back = PipelineConfig::from_json(cfg.to_json());
    CHECK(back.task == "joint");
    CHECK(back.variant == "hybrid");
    CHECK(back.seed == 77);
    CHECK(back.augment == false);
    CHECK(back.train.epochs == 3);
    CHECK(back.synth.subject_ids == std::vector<int>{1, 2, 3});
    CHECK(back.synth.noise_sigma == 2.5e-4);

    CHECK_THROWS_AS(PipelineConfig::from_json("{\"task\": \"unknown\"}"), DomainError);
    CHECK_THROWS_AS(PipelineConfig::from_json("not json"), ParseError);
}

TEST_CASE("small end-to-end run is deterministic and writes every artifact") {
    PipelineConfig cfg;
    cfg.task = "person";
    cfg.variant = "tc";
    cfg.seed = 11;
    cfg.synth.subject_ids = {1, 22};
    cfg.synth.frames_per_subject = 60;
    cfg.synth.noise_sigma = 1e-4;
    cfg.synth.seed = 13;
    cfg.train.epochs = 2;
    cfg.train.minibatch = 10;
    cfg.augment = true;
    cfg.min_accuracy = 0.5;

    auto a = fs::temp_directory_path() / "csisense_e2e_a";
    auto b = fs::temp_directory_path() / "csisense_e2e_b";
    fs::remove_all(a);
    fs::remove_all(b);

    auto ra = run_e2e(cfg, a.string());
    auto rb = run_e2e(cfg, b.string());
    CHECK(ra.passed);
    CHECK(ra.accuracy == rb.accuracy);

    for (const char* name : {"model.csnw", "metrics.json", "model_manifest.json", "config.json",
                             "e2e_result.json", "summary.txt"}) {
        CAPTURE(name);
        CHECK(fs::exists(a / name));
        CHECK(read_bytes(a / name) == read_bytes(b / name));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("joint task trains both heads and reports both metric families") {
    PipelineConfig cfg;
    cfg.task = "joint";
    cfg.seed = 19;
    cfg.synth.subject_ids = {1, 22};
    cfg.synth.frames_per_subject = 60;
    cfg.synth.noise_sigma = 1e-4;
    cfg.synth.seed = 23;
    cfg.train.epochs = 2;
    cfg.train.minibatch = 10;
    cfg.augment = false;
    cfg.min_accuracy = 0.0;
    cfg.max_mae = 1e9;
    cfg.require_beat_naive_bayes = false;

    auto out = std::filesystem::temp_directory_path() / "csisense_joint_e2e";
    fs::remove_all(out);
    auto res = run_e2e(cfg, out.string());
    CHECK(res.passed);
    CHECK(res.accuracy >= 0.0);
    CHECK(res.mae >= 0.0);
    REQUIRE(res.reports.size() == 2);
    CHECK(res.reports[0].has_classification);
    CHECK(res.reports[1].has_regression);
    CHECK(res.reports[1].radar.size() == 2);
    // truth columns carry the bundled subject biometrics
    CHECK(res.reports[1].radar[0].truth ==
          std::array<double, 4>{5.0, 89.7, 65.1, 13.0});
    CHECK(fs::exists(out / "radar_biometrics.csv"));
    fs::remove_all(out);
}

TEST_CASE("interpolation variant trains end to end") {
    PipelineConfig cfg;
    cfg.task = "person";
    cfg.variant = "interp";
    cfg.seed = 29;
    cfg.synth.subject_ids = {1, 22};
    cfg.synth.frames_per_subject = 60;
    cfg.synth.noise_sigma = 1e-4;
    cfg.synth.seed = 31;
    cfg.train.epochs = 2;
    cfg.train.minibatch = 10;
    cfg.augment = false;
    cfg.min_accuracy = 0.0;
    cfg.require_beat_naive_bayes = false;

    auto out = std::filesystem::temp_directory_path() / "csisense_interp_e2e";
    fs::remove_all(out);
    auto res = run_e2e(cfg, out.string());
    CHECK(res.passed);
    fs::remove_all(out);
}
