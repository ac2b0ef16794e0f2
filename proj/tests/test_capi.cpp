#include <doctest.h>

#include <csisense.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

// The shared-library surface: handles, error codes and the thread-local
// error message.

namespace {

const char* kTinySynth = R"({
  "band": "5GHz",
  "subject_ids": [1, 22],
  "frames_per_subject": 60,
  "noise_sigma": 1e-4,
  "seed": 9
})";

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("version and abi") {
    int maj = -1, min = -1, pat = -1;
    csn_version(&maj, &min, &pat);
    CHECK(maj == 1);
    CHECK(min >= 0);
    CHECK(pat >= 0);
    CHECK(csn_abi_version() == CSN_ABI_VERSION);
}

TEST_CASE("physics calculators and error reporting") {
    double v = 0;
    CHECK(csn_wave_speed(1.0, 1.0, &v) == CSN_OK);
    CHECK(v == doctest::Approx(299792458.0));
    CHECK(csn_wave_speed(33.11, 1.0, &v) == CSN_OK);
    CHECK(v == doctest::Approx(5.2100406592e7).epsilon(1e-9));
    CHECK(csn_wave_speed(0.5, 1.0, &v) == CSN_ERR_DOMAIN);  // permittivity below 1
    CHECK(std::strlen(csn_last_error()) > 0);

    double f = 0;
    CHECK(csn_doppler_shift(5e9, 1.0, 299792458.0, 1, &f) == CSN_OK);
    CHECK(f == doctest::Approx(16.678).epsilon(1e-3));
    CHECK(csn_doppler_shift(5e9, 1.0, 0.0, 1, &f) == CSN_ERR_DOMAIN);
    CHECK(csn_doppler_shift(5e9, 1.0, 1.0, 1, nullptr) == CSN_ERR_INVALID_ARGUMENT);

    double phi = 0;
    CHECK(csn_phase_variation(0.03, 0.06, &phi) == CSN_OK);
    CHECK(phi == doctest::Approx(3.14159265).epsilon(1e-6));
    CHECK(csn_phase_variation(0.03, 0.0, &phi) == CSN_ERR_DOMAIN);
}

TEST_CASE("dataset handle lifecycle") {
    csn_dataset* ds = nullptr;
    REQUIRE(csn_dataset_synth(kTinySynth, "falling", &ds) == CSN_OK);
    REQUIRE(ds != nullptr);

    int32_t n = 0;
    CHECK(csn_dataset_n_sequences(ds, &n) == CSN_OK);
    CHECK(n == 2);

    uint32_t frames = 0, sc = 0, cls = 99;
    double rate = 0;
    uint8_t kind = 0;
    float bio[4] = {0, 0, 0, 0};
    CHECK(csn_dataset_sequence_info(ds, 0, &frames, &sc, &rate, &kind, &cls, bio) == CSN_OK);
    CHECK(frames == 60);
    CHECK(sc == 30);
    CHECK(rate == 100.0);
    CHECK(kind == 1);  // class label
    CHECK(cls == 0);
    CHECK(csn_dataset_sequence_info(ds, 5, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr) ==
          CSN_ERR_DOMAIN);

    std::vector<float> amps(60 * 30);
    size_t written = 0;
    CHECK(csn_dataset_amplitudes(ds, 1, amps.data(), amps.size(), &written) == CSN_OK);
    CHECK(written == amps.size());
    CHECK(csn_dataset_amplitudes(ds, 1, amps.data(), 10, &written) == CSN_ERR_DOMAIN);

    auto file = tmp_path("csisense_capi_seq.csi1");
    CHECK(csn_dataset_write_file(ds, 0, file.c_str()) == CSN_OK);
    csn_dataset* loaded = nullptr;
    REQUIRE(csn_dataset_open_file(file.c_str(), &loaded) == CSN_OK);
    int32_t one = 0;
    CHECK(csn_dataset_n_sequences(loaded, &one) == CSN_OK);
    CHECK(one == 1);
    csn_dataset_free(loaded);
    std::filesystem::remove(file);

    CHECK(csn_dataset_filter(ds, "{\"median_window\": 3}") == CSN_OK);
    csn_dataset_free(ds);

    csn_dataset* missing = nullptr;
    CHECK(csn_dataset_open_file("/nonexistent/file.csi1", &missing) == CSN_ERR_IO);
    CHECK(missing == nullptr);
}

TEST_CASE("model handle train, eval, predict, save and load") {
    const char* pipeline = R"({
      "task": "falling",
      "variant": "hybrid",
      "scale": "desk",
      "seed": 4,
      "augment": false,
      "synth": {"subject_ids": [1, 22], "frames_per_subject": 60, "noise_sigma": 1e-4, "seed": 9},
      "train": {"epochs": 2, "minibatch": 10}
    })";

    csn_dataset* ds = nullptr;
    REQUIRE(csn_dataset_synth(kTinySynth, "falling", &ds) == CSN_OK);

    csn_model* model = nullptr;
    REQUIRE(csn_model_build(pipeline, 2, 42, &model) == CSN_OK);
    int64_t params = 0;
    CHECK(csn_model_num_params(model, &params) == CSN_OK);
    CHECK(params > 1000);

    REQUIRE(csn_model_train(model, ds, pipeline) == CSN_OK);
    double loss = 0;
    CHECK(csn_model_epoch_loss(model, 0, &loss) == CSN_OK);
    CHECK(loss > 0);
    CHECK(csn_model_epoch_loss(model, 99, &loss) == CSN_ERR_DOMAIN);

    char* metrics = nullptr;
    REQUIRE(csn_model_eval(model, ds, pipeline, &metrics) == CSN_OK);
    REQUIRE(metrics != nullptr);
    CHECK(std::string(metrics).find("\"accuracy\"") != std::string::npos);
    csn_string_free(metrics);

    std::vector<float> amps(30, 0.001f);
    int32_t cls = -1;
    CHECK(csn_model_predict_class(model, amps.data(), amps.size(), &cls) == CSN_OK);
    CHECK(cls >= 0);
    CHECK(cls < 2);

    auto ckpt = tmp_path("csisense_capi_model.csnw");
    CHECK(csn_model_save(model, ckpt.c_str()) == CSN_OK);
    CHECK(std::filesystem::exists(ckpt));
    std::filesystem::remove(ckpt);

    csn_model_free(model);
    csn_dataset_free(ds);
}

TEST_CASE("file-level pipeline through the C interface") {
    auto base = std::filesystem::temp_directory_path() / "csisense_capi_pipe";
    std::filesystem::remove_all(base);
    std::string ds_dir = (base / "ds").string();
    std::string model_dir = (base / "model").string();
    std::string metrics_dir = (base / "metrics").string();

    REQUIRE(csn_run_synth(kTinySynth, "falling", ds_dir.c_str()) == CSN_OK);
    CHECK(std::filesystem::exists(ds_dir + "/manifest.json"));

    const char* pipeline = R"({
      "task": "falling", "seed": 4, "augment": false,
      "synth": {"subject_ids": [1, 22], "frames_per_subject": 60, "noise_sigma": 1e-4, "seed": 9},
      "train": {"epochs": 2, "minibatch": 10}
    })";
    REQUIRE(csn_run_train(pipeline, ds_dir.c_str(), model_dir.c_str()) == CSN_OK);
    CHECK(std::filesystem::exists(model_dir + "/model.csnw"));
    CHECK(std::filesystem::exists(model_dir + "/model_manifest.json"));

    REQUIRE(csn_run_eval(pipeline, model_dir.c_str(), ds_dir.c_str(), metrics_dir.c_str()) ==
            CSN_OK);
    CHECK(std::filesystem::exists(metrics_dir + "/metrics.json"));

    csn_model* loaded = nullptr;
    REQUIRE(csn_model_load(model_dir.c_str(), &loaded) == CSN_OK);
    int64_t params = 0;
    CHECK(csn_model_num_params(loaded, &params) == CSN_OK);
    csn_model_free(loaded);

    CHECK(csn_run_report((metrics_dir + "/metrics.json").c_str(),
                         (base / "report").string().c_str()) == CSN_OK);
    CHECK(csn_run_report("/nonexistent/metrics.json", (base / "r2").string().c_str()) ==
          CSN_ERR_IO);

    std::filesystem::remove_all(base);
}
