#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace csisense {

enum class LabelKind : uint8_t {
    None = 0,
    ClassId = 1,
    Biometrics = 2,
    ClassAndBiometrics = 3,
};

struct Label {
    LabelKind kind = LabelKind::None;
    uint32_t class_id = 0;
    std::array<float, 4> biometrics = {0.f, 0.f, 0.f, 0.f};  // fat, muscle, water, bone

    bool has_class() const { return (static_cast<uint8_t>(kind) & 1u) != 0; }
    bool has_biometrics() const { return (static_cast<uint8_t>(kind) & 2u) != 0; }
    bool operator==(const Label& o) const;

    static Label of_class(uint32_t id);
    static Label of_biometrics(const std::array<float, 4>& bio);
    static Label of_class_and_biometrics(uint32_t id, const std::array<float, 4>& bio);
};

// One CSI sample: complex channel estimates of shape n_sc x n_tx x n_rx,
// stored subcarrier-major.
struct CsiFrame {
    uint32_t n_sc = 30;
    uint32_t n_tx = 1;
    uint32_t n_rx = 1;
    std::vector<std::complex<float>> values;  // n_sc * n_tx * n_rx
    int64_t timestamp_index = 0;

    size_t size() const { return values.size(); }
};

struct CsiSequence {
    std::vector<CsiFrame> frames;
    double sample_rate = 100.0;  // Hz
    Label label;

    void validate() const;
    size_t n_frames() const { return frames.size(); }
};

// Flattened per-frame amplitude vector, the network input.
struct Instance {
    std::vector<float> amplitude;  // length n_sc * n_tx * n_rx (30 by default)
    Label label;
};

// Element-wise modulus, flattened subcarrier-major.
Instance amplitude(const CsiFrame& frame);

// Real-valued amplitude series of a whole sequence, [sample][subcarrier].
struct AmplitudeSeries {
    size_t n_channels = 0;
    std::vector<float> values;  // n_samples() * n_channels, sample-major
    double sample_rate = 100.0;
    Label label;

    size_t n_samples() const { return n_channels == 0 ? 0 : values.size() / n_channels; }
    float& at(size_t sample, size_t channel) { return values[sample * n_channels + channel]; }
    float at(size_t sample, size_t channel) const { return values[sample * n_channels + channel]; }
};

AmplitudeSeries amplitudes(const CsiSequence& seq);
std::vector<Instance> to_instances(const AmplitudeSeries& series);

// Re-wraps a (filtered) amplitude series as a CSI sequence with zero
// imaginary parts, so it round-trips through the dataset format.
CsiSequence to_sequence(const AmplitudeSeries& series);

// "CSI1" dataset file: little-endian header {magic, n_sa, n_sc, n_tx, n_rx: u32;
// sample_rate: f64; label_kind: u8; label payload}, then per frame interleaved
// f32 (re, im) pairs, subcarrier-major. Parse errors carry the byte offset.
void write_dataset(const CsiSequence& seq, const std::string& path);
void write_dataset(const CsiSequence& seq, std::ostream& out);
CsiSequence read_dataset(const std::string& path);
CsiSequence read_dataset(std::istream& in);

// Debug export: header "label,a_1..a_30", one row per instance.
void write_instances_csv(const std::vector<Instance>& instances, const std::string& path);

}  // namespace csisense
