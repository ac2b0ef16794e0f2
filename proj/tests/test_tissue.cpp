#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "csisense/errors.hpp"
#include "csisense/rng.hpp"
#include "csisense/synth.hpp"
#include "csisense/tissue.hpp"

using namespace csisense;

namespace {

// Random layered path for the physics consistency properties.
PropagationPath random_path(Rng& rng) {
    const auto& table = DielectricTable::builtin();
    PropagationPath p;
    int n_layers = 1 + static_cast<int>(rng.next_below(4));
    for (int i = 0; i < n_layers; ++i) {
        const auto& entry = table.entries()[rng.next_below(table.entries().size())];
        TissueLayer layer;
        layer.name = tissue_kind_name(entry.kind);
        layer.rel_permittivity = entry.permittivity;
        layer.conductivity = entry.conductivity;
        layer.thickness = rng.uniform(0.001, 0.05);
        p.segments.push_back({layer, layer.thickness});
    }
    p.air_distance = rng.uniform(0.5, 5.0);
    return p;
}

}  // namespace

TEST_CASE("wave speed in air equals the vacuum speed of light") {
    CHECK(wave_speed(air_layer(1.0)) == doctest::Approx(299792458.0).epsilon(1e-12));
}

TEST_CASE("wave speed through listed tissues") {
    const auto& table = DielectricTable::builtin();
    auto skin = table.make_layer(TissueKind::SkinDry, Band::GHz5, 0.002);
    CHECK(wave_speed(skin) == doctest::Approx(5.2100406592e7).epsilon(1e-9));
    auto muscle = table.make_layer(TissueKind::Muscle, Band::GHz24, 0.03);
    CHECK(wave_speed(muscle) == doctest::Approx(4.2346270928e7).epsilon(1e-9));
}

TEST_CASE("time delay of an air-only path") {
    PropagationPath p;
    p.air_distance = 3.0;
    CHECK(time_delay(p) == doctest::Approx(3.0 / 299792458.0).epsilon(1e-12));
}

TEST_CASE("time delay is additive over segments") {
    const auto& table = DielectricTable::builtin();
    auto fat = table.make_layer(TissueKind::FatInfiltrated, Band::GHz5, 0.012);
    PropagationPath one;
    one.segments.push_back({fat, 0.012});
    one.air_distance = 1.0;
    PropagationPath two = one;
    two.segments.push_back({fat, 0.012});

    double d_air = 1.0 / kSpeedOfLight;
    double d_one = time_delay(one) - d_air;
    double d_two = time_delay(two) - d_air;
    CHECK(d_two == doctest::Approx(2.0 * d_one).epsilon(1e-12));
}

TEST_CASE("time delay of a skin/fat/air path matches the per-segment sum") {
    const auto& table = DielectricTable::builtin();
    PropagationPath p;
    p.segments.push_back({table.make_layer(TissueKind::SkinDry, Band::GHz5, 0.002), 0.002});
    p.segments.push_back({table.make_layer(TissueKind::FatNotInfiltrated, Band::GHz5, 0.010), 0.010});
    p.air_distance = 1.0;
    // d * sqrt(eps_r) / c0 per segment, summed by hand.
    CHECK(time_delay(p) == doctest::Approx(3.4528935305628214e-9).epsilon(1e-12));
}

TEST_CASE("attenuation coefficient") {
    SUBCASE("lossless medium gives exactly 1") {
        TissueLayer l = air_layer(10.0);
        CHECK(attenuation_coefficient(l) == 1.0);
    }
    SUBCASE("vanishing thickness tends to 1") {
        const auto& table = DielectricTable::builtin();
        auto muscle = table.make_layer(TissueKind::Muscle, Band::GHz5, 1e-12);
        CHECK(attenuation_coefficient(muscle) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("muscle at 5 GHz over 10 mm") {
        const auto& table = DielectricTable::builtin();
        auto muscle = table.make_layer(TissueKind::Muscle, Band::GHz5, 0.010);
        // alpha = (sigma/2) sqrt(mu/eps) = 158.39042... Np/m, evaluated separately.
        CHECK(attenuation_coefficient(muscle) == doctest::Approx(0.20517249767).epsilon(1e-9));
    }
}

TEST_CASE("power decay basics") {
    PropagationPath p;
    p.air_distance = 2.0;
    SUBCASE("zero input stays zero") { CHECK(power_decay(p, 0.0, 5e9) == 0.0); }
    SUBCASE("free-space factor is clamped to 1 in the near field") {
        CHECK(free_space_decay(5e9, 1e-4) == 1.0);
        CHECK(free_space_decay(5e9, 1.6) == doctest::Approx(0.0029820907245).epsilon(1e-9));
    }
    SUBCASE("adding a lossy layer strictly decreases the output") {
        const auto& table = DielectricTable::builtin();
        double before = power_decay(p, 1.0, 5e9);
        PropagationPath with_layer = p;
        auto muscle = table.make_layer(TissueKind::Muscle, Band::GHz5, 0.01);
        with_layer.segments.push_back({muscle, 0.01});
        CHECK(power_decay(with_layer, 1.0, 5e9) < before);
    }
}

TEST_CASE("power decay is multiplicative over path concatenation") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        PropagationPath a = random_path(rng);
        PropagationPath b = random_path(rng);
        PropagationPath joined = a;
        for (const auto& seg : b.segments) joined.segments.push_back(seg);
        double fa = power_decay(a, 1.0, 5e9);
        double fb_layers_only = 1.0;
        for (const auto& seg : b.segments) {
            TissueLayer crossed = seg.medium;
            crossed.thickness = seg.distance;
            fb_layers_only *= attenuation_coefficient(crossed);
        }
        CHECK(power_decay(joined, 1.0, 5e9) ==
              doctest::Approx(fa * fb_layers_only).epsilon(1e-12));
    }
}

TEST_CASE("doppler shift") {
    CHECK(doppler_shift(5e9, 1.0, kSpeedOfLight, true) == doctest::Approx(16.678).epsilon(1e-3));
    CHECK(doppler_shift(5e9, 0.0, kSpeedOfLight, true) == 0.0);
    CHECK(doppler_shift(2.4e9, 1.0, kSpeedOfLight, true) ==
          doctest::Approx(8.00553828).epsilon(1e-8));
    CHECK(doppler_shift(5e9, 1.0, kSpeedOfLight, false) < 0.0);
    CHECK_THROWS_AS(doppler_shift(5e9, 1.0, 0.0, true), DomainError);
    CHECK_THROWS_AS(doppler_shift(5e9, 1.0, -3.0, true), DomainError);
}

TEST_CASE("phase variation stays in [0, 2pi)") {
    double lambda = 0.06;
    CHECK(phase_variation(lambda, lambda) == doctest::Approx(0.0));
    CHECK(phase_variation(0.5 * lambda, lambda) == doctest::Approx(3.14159265358979).epsilon(1e-12));
    CHECK(phase_variation(2.75 * lambda, lambda) ==
          doctest::Approx(1.5 * 3.14159265358979).epsilon(1e-9));
    CHECK_THROWS_AS(phase_variation(1.0, 0.0), DomainError);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        double d = rng.uniform(0.0, 50.0);
        double phi = phase_variation(d, lambda);
        CHECK(phi >= 0.0);
        CHECK(phi < 2.0 * 3.14159265358979323846);
    }
}

TEST_CASE("received signal magnitude and phase are consistent with decay and delay") {
    Rng rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        PropagationPath p = random_path(rng);
        double f = rng.uniform(2.0e9, 6.0e9);
        std::complex<double> x = std::polar(rng.uniform(0.1, 2.0), rng.uniform(0.0, 6.28));
        auto y = received_signal(p, x, f);

        double expected_mag = power_decay(p, std::abs(x), f);
        CHECK(std::abs(y) == doctest::Approx(expected_mag).epsilon(1e-12));

        double two_pi = 2.0 * 3.14159265358979323846;
        double got = std::arg(y / x);
        double want = -std::fmod(two_pi * f * time_delay(p), two_pi);
        double diff = std::fmod(got - want, two_pi);
        if (diff < -3.14159265358979323846) diff += two_pi;
        if (diff > 3.14159265358979323846) diff -= two_pi;
        CHECK(std::abs(diff) < 1e-9);
    }
}

TEST_CASE("lossless air path of a whole number of wavelengths keeps the phase") {
    double f = 5e9;
    double lambda = kSpeedOfLight / f;
    PropagationPath p;
    p.air_distance = 25.0 * lambda;
    std::complex<double> x{0.7, -0.2};
    auto y = received_signal(p, x, f);
    CHECK(std::arg(y / x) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(std::abs(y) == doctest::Approx(free_space_decay(f, p.air_distance) * std::abs(x)));
}

TEST_CASE("dielectric table matches the shipped csv") {
    const char* data_dir = std::getenv("CSISENSE_DATA_DIR");
    std::string path = std::string(data_dir ? data_dir : "data") + "/tissue_dielectrics.csv";
    REQUIRE(std::filesystem::exists(path));
    auto loaded = DielectricTable::from_csv(path);
    CHECK(loaded.entries().size() == 14);
    CHECK(loaded == DielectricTable::builtin());
    for (const auto& e : DielectricTable::builtin().entries()) {
        CHECK(loaded.lookup(e.kind, e.band).permittivity == e.permittivity);
        CHECK(loaded.lookup(e.kind, e.band).conductivity == e.conductivity);
    }
}

TEST_CASE("dielectric table csv round trip") {
    auto tmp = std::filesystem::temp_directory_path() / "csisense_dielectric_rt.csv";
    DielectricTable::builtin().write_csv(tmp.string());
    auto loaded = DielectricTable::from_csv(tmp.string());
    CHECK(loaded == DielectricTable::builtin());
    std::filesystem::remove(tmp);
}

TEST_CASE("subject table has the 30 bundled subjects") {
    const auto& subjects = builtin_subjects();
    REQUIRE(subjects.size() == 30);
    CHECK(subjects.front().fat_rate == 5.0);
    CHECK(subjects.front().muscle_rate == 89.7);
    CHECK(subjects.front().water_rate == 65.1);
    CHECK(subjects.front().bone_rate == 13.0);
    CHECK(subjects.back().id == 30);
    CHECK(subjects.back().weight_lbs == 152.7);

    const char* data_dir = std::getenv("CSISENSE_DATA_DIR");
    std::string path = std::string(data_dir ? data_dir : "data") + "/subjects.csv";
    REQUIRE(std::filesystem::exists(path));
    auto loaded = subjects_from_csv(path);
    REQUIRE(loaded.size() == 30);
    for (size_t i = 0; i < 30; ++i) {
        CHECK(loaded[i].id == subjects[i].id);
        CHECK(loaded[i].sex == subjects[i].sex);
        CHECK(loaded[i].fat_rate == subjects[i].fat_rate);
        CHECK(loaded[i].muscle_rate == subjects[i].muscle_rate);
        CHECK(loaded[i].water_rate == subjects[i].water_rate);
        CHECK(loaded[i].bone_rate == subjects[i].bone_rate);
        CHECK(loaded[i].height_in == subjects[i].height_in);
        CHECK(loaded[i].weight_lbs == subjects[i].weight_lbs);
    }
}

TEST_CASE("subject to body mapping") {
    auto body = subject_to_body(subject_by_id(1), Band::GHz5);
    REQUIRE(body.layers.size() == 3);
    CHECK(body.layers[0].thickness == doctest::Approx(0.002));
    CHECK(body.layers[1].thickness == doctest::Approx(0.00125));   // 5 mm * 5.0 / 20
    CHECK(body.layers[2].thickness == doctest::Approx(0.0345));    // 30 mm * 89.7 / 78
    CHECK(body.layers[0].rel_permittivity == 33.11);

    SUBCASE("same profile gives an identical body") {
        auto again = subject_to_body(subject_by_id(1), Band::GHz5);
        for (size_t i = 0; i < 3; ++i) {
            CHECK(again.layers[i].thickness == body.layers[i].thickness);
            CHECK(again.layers[i].rel_permittivity == body.layers[i].rel_permittivity);
            CHECK(again.layers[i].conductivity == body.layers[i].conductivity);
        }
    }
    SUBCASE("fat thickness grows with fat rate") {
        SubjectProfile lean = subject_by_id(1);
        SubjectProfile heavy = lean;
        heavy.fat_rate = 24.0;
        CHECK(subject_to_body(heavy, Band::GHz5).layers[1].thickness >
              subject_to_body(lean, Band::GHz5).layers[1].thickness);
    }
    SUBCASE("band selects the dielectric constants") {
        auto body24 = subject_to_body(subject_by_id(1), Band::GHz24);
        CHECK(body24.layers[0].rel_permittivity == 39.81);
    }
}

TEST_CASE("synthesized sequences are reproducible and sensitive to the body") {
    SynthGeometry geom;
    auto subcarriers = make_subcarriers(5e9, 10e6, 30);
    auto body1 = subject_to_body(subject_by_id(1), Band::GHz5);
    auto body22 = subject_to_body(subject_by_id(22), Band::GHz5);

    SUBCASE("zero noise keeps all frames identical") {
        auto seq = synth_csi(body1, geom, subcarriers, 8, 0.0, 42);
        REQUIRE(seq.frames.size() == 8);
        for (const auto& f : seq.frames) {
            for (size_t i = 0; i < f.values.size(); ++i)
                CHECK(f.values[i] == seq.frames.front().values[i]);
        }
    }
    SUBCASE("equal seeds give bit-identical sequences") {
        auto a = synth_csi(body1, geom, subcarriers, 16, 1e-4, 7);
        auto b = synth_csi(body1, geom, subcarriers, 16, 1e-4, 7);
        REQUIRE(a.frames.size() == b.frames.size());
        for (size_t i = 0; i < a.frames.size(); ++i)
            for (size_t j = 0; j < a.frames[i].values.size(); ++j)
                CHECK(a.frames[i].values[j] == b.frames[i].values[j]);
    }
    SUBCASE("different seeds differ") {
        auto a = synth_csi(body1, geom, subcarriers, 4, 1e-4, 7);
        auto b = synth_csi(body1, geom, subcarriers, 4, 1e-4, 8);
        bool any_diff = false;
        for (size_t j = 0; j < a.frames[0].values.size(); ++j)
            any_diff |= (a.frames[0].values[j] != b.frames[0].values[j]);
        CHECK(any_diff);
    }
    SUBCASE("distinct biometrics separate mean amplitudes well above the noise floor") {
        double sigma = 1e-4;
        auto a = synth_csi(body1, geom, subcarriers, 64, sigma, 3);
        auto b = synth_csi(body22, geom, subcarriers, 64, sigma, 3);
        double max_gap = 0.0;
        for (size_t sc = 0; sc < 30; ++sc) {
            double ma = 0.0, mb = 0.0;
            for (size_t s = 0; s < 64; ++s) {
                ma += std::abs(a.frames[s].values[sc]);
                mb += std::abs(b.frames[s].values[sc]);
            }
            max_gap = std::max(max_gap, std::abs(ma - mb) / 64.0);
        }
        CHECK(max_gap > 10.0 * sigma);
    }
    SUBCASE("empty subcarrier list is rejected") {
        CHECK_THROWS_AS(synth_csi(body1, geom, {}, 4, 0.0, 1), DomainError);
    }
}

TEST_CASE("snr calibration helper") {
    SynthGeometry geom;
    auto subcarriers = make_subcarriers(5e9, 10e6, 30);
    auto body = subject_to_body(subject_by_id(1), Band::GHz5);
    double p = mean_channel_power(body, geom, subcarriers);
    CHECK(p > 0.0);
    double sigma = noise_sigma_for_snr(p, 20.0);
    CHECK(10.0 * std::log10(p / (2.0 * sigma * sigma)) == doctest::Approx(20.0).epsilon(1e-9));
}
