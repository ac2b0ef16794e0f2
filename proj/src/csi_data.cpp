#include "csisense/csi_data.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "csisense/errors.hpp"

namespace csisense {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'I', '1'};

// Little-endian scalar IO. The build targets little-endian hosts; memcpy
// keeps it alias-safe.
template <typename T>
void put(std::ostream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <typename T>
    T get(const char* what) {
        char buf[sizeof(T)];
        in_.read(buf, sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T)))
            throw ParseError(std::string("truncated dataset while reading ") + what, offset_);
        offset_ += sizeof(T);
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }

    void get_raw(char* dst, size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw ParseError(std::string("truncated dataset while reading ") + what, offset_);
        offset_ += static_cast<long long>(n);
    }

    long long offset() const { return offset_; }

private:
    std::istream& in_;
    long long offset_ = 0;
};

void append_float(std::string& s, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    s.append(buf, res.ptr);
}

}  // namespace

bool Label::operator==(const Label& o) const {
    if (kind != o.kind) return false;
    if (has_class() && class_id != o.class_id) return false;
    if (has_biometrics() && biometrics != o.biometrics) return false;
    return true;
}

Label Label::of_class(uint32_t id) {
    Label l;
    l.kind = LabelKind::ClassId;
    l.class_id = id;
    return l;
}

Label Label::of_biometrics(const std::array<float, 4>& bio) {
    Label l;
    l.kind = LabelKind::Biometrics;
    l.biometrics = bio;
    return l;
}

Label Label::of_class_and_biometrics(uint32_t id, const std::array<float, 4>& bio) {
    Label l;
    l.kind = LabelKind::ClassAndBiometrics;
    l.class_id = id;
    l.biometrics = bio;
    return l;
}

void CsiSequence::validate() const {
    if (sample_rate <= 0.0) throw DomainError("sample rate must be > 0");
    if (frames.empty()) return;
    const CsiFrame& first = frames.front();
    for (const auto& f : frames) {
        if (f.n_sc != first.n_sc || f.n_tx != first.n_tx || f.n_rx != first.n_rx)
            throw DomainError("all frames in a sequence must share one shape");
        if (f.values.size() != static_cast<size_t>(f.n_sc) * f.n_tx * f.n_rx)
            throw DomainError("frame value count does not match its shape");
        for (const auto& v : f.values) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw DomainError("frame contains non-finite values");
        }
    }
}

Instance amplitude(const CsiFrame& frame) {
    Instance inst;
    inst.amplitude.reserve(frame.values.size());
    for (const auto& v : frame.values) inst.amplitude.push_back(std::abs(v));
    return inst;
}

AmplitudeSeries amplitudes(const CsiSequence& seq) {
    AmplitudeSeries s;
    s.sample_rate = seq.sample_rate;
    s.label = seq.label;
    if (seq.frames.empty()) return s;
    s.n_channels = seq.frames.front().values.size();
    s.values.reserve(seq.frames.size() * s.n_channels);
    for (const auto& f : seq.frames) {
        for (const auto& v : f.values) s.values.push_back(std::abs(v));
    }
    return s;
}

std::vector<Instance> to_instances(const AmplitudeSeries& series) {
    std::vector<Instance> out;
    out.reserve(series.n_samples());
    for (size_t i = 0; i < series.n_samples(); ++i) {
        Instance inst;
        inst.amplitude.assign(series.values.begin() + static_cast<long>(i * series.n_channels),
                              series.values.begin() +
                                  static_cast<long>((i + 1) * series.n_channels));
        // Instances are amplitudes; zero-phase filtering may undershoot 0.
        for (auto& a : inst.amplitude) a = std::max(a, 0.0f);
        inst.label = series.label;
        out.push_back(std::move(inst));
    }
    return out;
}

CsiSequence to_sequence(const AmplitudeSeries& series) {
    CsiSequence seq;
    seq.sample_rate = series.sample_rate;
    seq.label = series.label;
    seq.frames.reserve(series.n_samples());
    for (size_t i = 0; i < series.n_samples(); ++i) {
        CsiFrame f;
        f.n_sc = static_cast<uint32_t>(series.n_channels);
        f.n_tx = 1;
        f.n_rx = 1;
        f.timestamp_index = static_cast<int64_t>(i);
        f.values.reserve(series.n_channels);
        for (size_t c = 0; c < series.n_channels; ++c)
            f.values.emplace_back(series.at(i, c), 0.0f);
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

void write_dataset(const CsiSequence& seq, std::ostream& out) {
    seq.validate();
    out.write(kMagic, 4);
    uint32_t n_sa = static_cast<uint32_t>(seq.frames.size());
    uint32_t n_sc = seq.frames.empty() ? 30u : seq.frames.front().n_sc;
    uint32_t n_tx = seq.frames.empty() ? 1u : seq.frames.front().n_tx;
    uint32_t n_rx = seq.frames.empty() ? 1u : seq.frames.front().n_rx;
    put(out, n_sa);
    put(out, n_sc);
    put(out, n_tx);
    put(out, n_rx);
    put(out, seq.sample_rate);
    put(out, static_cast<uint8_t>(seq.label.kind));
    if (seq.label.has_class()) put(out, seq.label.class_id);
    if (seq.label.has_biometrics()) {
        for (float b : seq.label.biometrics) put(out, b);
    }
    for (const auto& f : seq.frames) {
        for (const auto& v : f.values) {
            put(out, v.real());
            put(out, v.imag());
        }
    }
    if (!out) throw IoError("write failed while emitting dataset");
}

void write_dataset(const CsiSequence& seq, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    write_dataset(seq, out);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

CsiSequence read_dataset(std::istream& in) {
    Reader r(in);
    char magic[4];
    r.get_raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw ParseError("bad magic, not a CSI1 dataset", 0);
    uint32_t n_sa = r.get<uint32_t>("n_sa");
    uint32_t n_sc = r.get<uint32_t>("n_sc");
    uint32_t n_tx = r.get<uint32_t>("n_tx");
    uint32_t n_rx = r.get<uint32_t>("n_rx");
    if (n_sc == 0 || n_tx == 0 || n_rx == 0)
        throw ParseError("dataset header declares an empty frame shape", r.offset());
    size_t per_frame = static_cast<size_t>(n_sc) * n_tx * n_rx;
    if (per_frame > (1u << 24)) throw ParseError("implausible frame shape", r.offset());
    CsiSequence seq;
    seq.sample_rate = r.get<double>("sample_rate");
    if (!(seq.sample_rate > 0.0)) throw ParseError("sample rate must be > 0", r.offset());
    uint8_t kind = r.get<uint8_t>("label_kind");
    if (kind > 3) throw ParseError("unknown label kind", r.offset());
    seq.label.kind = static_cast<LabelKind>(kind);
    if (seq.label.has_class()) seq.label.class_id = r.get<uint32_t>("class_id");
    if (seq.label.has_biometrics()) {
        for (auto& b : seq.label.biometrics) b = r.get<float>("biometrics");
    }
    seq.frames.reserve(n_sa);
    for (uint32_t i = 0; i < n_sa; ++i) {
        CsiFrame f;
        f.n_sc = n_sc;
        f.n_tx = n_tx;
        f.n_rx = n_rx;
        f.timestamp_index = static_cast<int64_t>(i);
        f.values.reserve(per_frame);
        for (size_t j = 0; j < per_frame; ++j) {
            float re = r.get<float>("frame data");
            float im = r.get<float>("frame data");
            f.values.emplace_back(re, im);
        }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

CsiSequence read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + path);
    return read_dataset(in);
}

void write_instances_csv(const std::vector<Instance>& instances, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    size_t width = instances.empty() ? 30 : instances.front().amplitude.size();
    std::string header = "label";
    for (size_t i = 1; i <= width; ++i) header += ",a_" + std::to_string(i);
    out << header << '\n';
    std::string row;
    for (const auto& inst : instances) {
        row.clear();
        if (inst.label.has_class())
            row += std::to_string(inst.label.class_id);
        else
            row += "-";
        for (float a : inst.amplitude) {
            row += ',';
            append_float(row, a);
        }
        out << row << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace csisense
