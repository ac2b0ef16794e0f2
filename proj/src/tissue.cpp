#include "csisense/tissue.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csisense/errors.hpp"

namespace csisense {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Tissues x {2.4 GHz, 5 GHz}: relative permittivity, conductivity (S/m),
// measured at body temperature.
const DielectricEntry kDielectrics[] = {
    {TissueKind::SkinDry, Band::GHz24, 39.81, 1.78},
    {TissueKind::SkinDry, Band::GHz5, 33.11, 3.98},
    {TissueKind::SkinWet, Band::GHz24, 39.81, 2.24},
    {TissueKind::SkinWet, Band::GHz5, 35.48, 5.62},
    {TissueKind::FatInfiltrated, Band::GHz24, 10.23, 0.32},
    {TissueKind::FatInfiltrated, Band::GHz5, 8.91, 0.71},
    {TissueKind::FatNotInfiltrated, Band::GHz24, 5.62, 0.10},
    {TissueKind::FatNotInfiltrated, Band::GHz5, 5.59, 0.32},
    {TissueKind::Muscle, Band::GHz24, 50.12, 2.51},
    {TissueKind::Muscle, Band::GHz5, 44.67, 5.62},
    {TissueKind::BoneCortical, Band::GHz24, 11.22, 0.56},
    {TissueKind::BoneCortical, Band::GHz5, 8.91, 1.12},
    {TissueKind::BoneCancellous, Band::GHz24, 15.85, 0.71},
    {TissueKind::BoneCancellous, Band::GHz5, 14.13, 1.41},
};

// id, sex, fat, muscle, water, bone (percent), height (in), weight (lbs).
const SubjectProfile kSubjects[] = {
    {1, "male", 5.0, 89.7, 65.1, 13.0, 70.5, 113.8},
    {2, "male", 5.0, 89.9, 65.1, 13.0, 66.1, 107.9},
    {3, "male", 14.3, 81.2, 58.7, 4.1, 68.1, 141.2},
    {4, "male", 7.3, 87.8, 63.5, 8.7, 68.5, 121.0},
    {5, "male", 8.4, 86.7, 62.8, 7.5, 66.9, 118.9},
    {6, "female", 22.9, 72.8, 52.8, 2.3, 62.6, 104.7},
    {7, "male", 12.7, 82.7, 59.8, 4.7, 70.9, 143.7},
    {8, "male", 18.9, 76.9, 55.6, 2.9, 71.3, 161.7},
    {9, "male", 9.9, 85.3, 61.7, 6.2, 71.3, 134.2},
    {10, "male", 15.0, 80.5, 58.2, 3.9, 65.0, 127.9},
    {11, "male", 11.0, 84.3, 61.0, 5.5, 70.5, 138.3},
    {12, "male", 18.9, 76.8, 55.6, 2.9, 66.9, 148.2},
    {13, "female", 12.7, 82.6, 59.8, 4.7, 62.6, 114.5},
    {14, "female", 17.5, 78.0, 56.5, 3.2, 63.8, 105.4},
    {15, "female", 16.9, 78.2, 56.9, 3.4, 66.5, 109.1},
    {16, "female", 26.2, 69.4, 50.6, 1.9, 63.4, 121.9},
    {17, "male", 20.9, 75.0, 54.2, 2.6, 68.5, 161.2},
    {18, "female", 17.2, 78.3, 56.7, 3.3, 64.2, 105.9},
    {19, "female", 22.5, 73.2, 53.1, 2.4, 63.0, 104.8},
    {20, "male", 25.1, 70.9, 51.3, 2.0, 71.7, 190.5},
    {21, "female", 24.9, 70.9, 51.4, 2.1, 61.8, 106.0},
    {22, "female", 30.9, 65.2, 49.2, 1.6, 60.6, 118.4},
    {23, "female", 22.0, 73.7, 53.5, 2.4, 62.2, 102.1},
    {24, "male", 10.1, 85.2, 61.6, 6.1, 69.3, 128.9},
    {25, "female", 20.9, 74.4, 54.2, 2.6, 62.6, 110.6},
    {26, "female", 20.8, 74.4, 54.2, 2.6, 65.4, 110.6},
    {27, "male", 20.8, 75.0, 54.2, 2.6, 68.9, 162.5},
    {28, "male", 14.4, 81.1, 58.6, 4.1, 66.9, 135.4},
    {29, "male", 23.5, 72.5, 52.4, 2.2, 72.8, 187.9},
    {30, "male", 22.3, 73.6, 53.2, 2.4, 65.0, 152.7},
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

const char* band_name(Band b) { return b == Band::GHz24 ? "2.4GHz" : "5GHz"; }

Band band_from_name(const std::string& name) {
    if (name == "2.4GHz" || name == "2.4" || name == "2.4ghz") return Band::GHz24;
    if (name == "5GHz" || name == "5" || name == "5ghz") return Band::GHz5;
    throw DomainError("unknown band: " + name);
}

const char* tissue_kind_name(TissueKind k) {
    switch (k) {
        case TissueKind::SkinDry: return "skin_dry";
        case TissueKind::SkinWet: return "skin_wet";
        case TissueKind::FatInfiltrated: return "fat_infiltrated";
        case TissueKind::FatNotInfiltrated: return "fat_not_infiltrated";
        case TissueKind::Muscle: return "muscle";
        case TissueKind::BoneCortical: return "bone_cortical";
        case TissueKind::BoneCancellous: return "bone_cancellous";
    }
    return "unknown";
}

TissueKind tissue_kind_from_name(const std::string& name) {
    for (const auto& e : kDielectrics) {
        if (name == tissue_kind_name(e.kind)) return e.kind;
    }
    throw DomainError("unknown tissue kind: " + name);
}

void TissueLayer::validate() const {
    if (rel_permittivity < 1.0) throw DomainError("rel_permittivity must be >= 1: " + name);
    if (conductivity < 0.0) throw DomainError("conductivity must be >= 0: " + name);
    if (rel_permeability <= 0.0) throw DomainError("rel_permeability must be > 0: " + name);
    if (thickness <= 0.0) throw DomainError("thickness must be > 0: " + name);
}

TissueLayer air_layer(double thickness) {
    TissueLayer l;
    l.thickness = thickness;
    return l;
}

const DielectricTable& DielectricTable::builtin() {
    static const DielectricTable table = [] {
        DielectricTable t;
        t.entries_.assign(std::begin(kDielectrics), std::end(kDielectrics));
        return t;
    }();
    return table;
}

const DielectricEntry& DielectricTable::lookup(TissueKind kind, Band band) const {
    for (const auto& e : entries_) {
        if (e.kind == kind && e.band == band) return e;
    }
    throw DomainError(std::string("dielectric table has no entry for ") + tissue_kind_name(kind) +
                      " at " + band_name(band));
}

TissueLayer DielectricTable::make_layer(TissueKind kind, Band band, double thickness) const {
    const DielectricEntry& e = lookup(kind, band);
    TissueLayer l;
    l.name = tissue_kind_name(kind);
    l.rel_permittivity = e.permittivity;
    l.conductivity = e.conductivity;
    l.thickness = thickness;
    l.validate();
    return l;
}

bool DielectricTable::operator==(const DielectricTable& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (size_t i = 0; i < entries_.size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = other.entries_[i];
        if (a.kind != b.kind || a.band != b.band || a.permittivity != b.permittivity ||
            a.conductivity != b.conductivity)
            return false;
    }
    return true;
}

DielectricTable DielectricTable::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dielectric table: " + path);
    DielectricTable t;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {  // header row
            header_seen = true;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() != 4) throw ParseError("dielectric table row needs 4 fields: " + line);
        DielectricEntry e;
        e.kind = tissue_kind_from_name(f[0]);
        e.band = band_from_name(f[1]);
        e.permittivity = std::stod(f[2]);
        e.conductivity = std::stod(f[3]);
        t.entries_.push_back(e);
    }
    if (t.entries_.size() != 14)
        throw ParseError("dielectric table must have exactly 14 rows, got " +
                         std::to_string(t.entries_.size()));
    return t;
}

void DielectricTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dielectric table: " + path);
    out << "# csisense tissue dielectric table, format version 1\n";
    out << "tissue,band,permittivity,conductivity_s_per_m\n";
    for (const auto& e : entries_) {
        out << tissue_kind_name(e.kind) << ',' << band_name(e.band) << ',' << e.permittivity << ','
            << e.conductivity << '\n';
    }
}

const std::vector<SubjectProfile>& builtin_subjects() {
    static const std::vector<SubjectProfile> subjects(std::begin(kSubjects), std::end(kSubjects));
    return subjects;
}

const SubjectProfile& subject_by_id(int id) {
    for (const auto& s : builtin_subjects()) {
        if (s.id == id) return s;
    }
    throw DomainError("no bundled subject with id " + std::to_string(id));
}

std::vector<SubjectProfile> subjects_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open subject table: " + path);
    std::vector<SubjectProfile> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() != 8) throw ParseError("subject row needs 8 fields: " + line);
        SubjectProfile s;
        s.id = std::stoi(f[0]);
        s.sex = f[1];
        s.fat_rate = std::stod(f[2]);
        s.muscle_rate = std::stod(f[3]);
        s.water_rate = std::stod(f[4]);
        s.bone_rate = std::stod(f[5]);
        s.height_in = std::stod(f[6]);
        s.weight_lbs = std::stod(f[7]);
        out.push_back(s);
    }
    return out;
}

void subjects_write_csv(const std::vector<SubjectProfile>& subjects, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write subject table: " + path);
    out << "# csisense subject biometrics table, format version 1\n";
    out << "id,sex,fat_rate,muscle_rate,water_rate,bone_rate,height_in,weight_lbs\n";
    for (const auto& s : subjects) {
        out << s.id << ',' << s.sex << ',' << s.fat_rate << ',' << s.muscle_rate << ','
            << s.water_rate << ',' << s.bone_rate << ',' << s.height_in << ',' << s.weight_lbs
            << '\n';
    }
}

void PropagationPath::validate() const {
    if (air_distance <= 0.0) throw DomainError("air distance must be > 0");
    for (const auto& seg : segments) {
        if (seg.distance <= 0.0) throw DomainError("segment distance must be > 0");
        seg.medium.validate();
    }
}

double BodyModel::total_thickness() const {
    double t = 0.0;
    for (const auto& l : layers) t += l.thickness;
    return t;
}

void BodyModel::validate() const {
    if (layers.empty()) throw DomainError("body model needs at least one layer");
    for (const auto& l : layers) l.validate();
    if (total_thickness() <= 0.0) throw DomainError("body model total thickness must be > 0");
}

double wave_speed(const TissueLayer& layer) {
    return kSpeedOfLight / std::sqrt(layer.rel_permeability * layer.rel_permittivity);
}

double time_delay(const PropagationPath& path) {
    double t = path.air_distance / kSpeedOfLight;
    for (const auto& seg : path.segments) {
        t += seg.distance * std::sqrt(seg.medium.rel_permeability * seg.medium.rel_permittivity) /
             kSpeedOfLight;
    }
    return t;
}

double attenuation_coefficient(const TissueLayer& layer) {
    if (layer.conductivity == 0.0) return 1.0;
    double mu = layer.rel_permeability * kVacuumPermeability;
    double eps = layer.rel_permittivity * kVacuumPermittivity;
    double alpha = 0.5 * layer.conductivity * std::sqrt(mu / eps);
    return std::exp(-alpha * layer.thickness);
}

namespace {

double segment_decay(const PathSegment& seg) {
    TissueLayer crossed = seg.medium;
    crossed.thickness = seg.distance;
    return attenuation_coefficient(crossed);
}

// Shared by power_decay and received_signal so their magnitudes agree
// exactly, not just to rounding.
double path_decay_factor(const PropagationPath& path, double frequency_hz) {
    double factor = free_space_decay(frequency_hz, path.air_distance);
    for (const auto& seg : path.segments) factor *= segment_decay(seg);
    return factor;
}

}  // namespace

double free_space_decay(double frequency_hz, double air_distance_m) {
    if (frequency_hz <= 0.0) throw DomainError("frequency must be > 0");
    if (air_distance_m <= 0.0) throw DomainError("air distance must be > 0");
    double wavelength = kSpeedOfLight / frequency_hz;
    double c0 = wavelength / (4.0 * kPi * air_distance_m);
    return std::min(c0, 1.0);
}

double power_decay(const PropagationPath& path, double amplitude, double frequency_hz) {
    if (amplitude < 0.0) throw DomainError("amplitude must be >= 0");
    return amplitude * path_decay_factor(path, frequency_hz);
}

std::complex<double> received_signal(const PropagationPath& path, std::complex<double> x,
                                     double frequency_hz) {
    if (frequency_hz <= 0.0) throw DomainError("frequency must be > 0");
    double magnitude = path_decay_factor(path, frequency_hz);
    double theta = 2.0 * kPi * frequency_hz * time_delay(path);
    return magnitude * std::polar(1.0, -theta) * x;
}

double doppler_shift(double carrier_hz, double object_speed, double wave_speed,
                     bool approaching) {
    if (wave_speed <= 0.0) throw DomainError("wave speed must be > 0");
    double shift = object_speed / wave_speed * carrier_hz;
    return approaching ? shift : -shift;
}

double phase_variation(double distance_m, double wavelength_m) {
    if (wavelength_m <= 0.0) throw DomainError("wavelength must be > 0");
    double two_pi = 2.0 * kPi;
    double phi = std::fmod(two_pi * distance_m / wavelength_m, two_pi);
    if (phi < 0.0) phi += two_pi;
    if (phi >= two_pi) phi = 0.0;
    return phi;
}

BodyModel subject_to_body(const SubjectProfile& profile, Band band, const DielectricTable& table) {
    if (profile.fat_rate <= 0.0 || profile.fat_rate >= 100.0)
        throw DomainError("fat_rate out of (0, 100)");
    if (profile.muscle_rate <= 0.0 || profile.muscle_rate >= 100.0)
        throw DomainError("muscle_rate out of (0, 100)");
    BodyModel body;
    body.layers.push_back(table.make_layer(TissueKind::SkinDry, band, 0.002));
    body.layers.push_back(
        table.make_layer(TissueKind::FatNotInfiltrated, band, 0.005 * profile.fat_rate / 20.0));
    body.layers.push_back(
        table.make_layer(TissueKind::Muscle, band, 0.030 * profile.muscle_rate / 78.0));
    body.validate();
    return body;
}

double SynthGeometry::extra_air_for(int body_path_index) const {
    if (body_path_index < static_cast<int>(extra_air.size())) return extra_air[body_path_index];
    double last = extra_air.empty() ? 0.2 : extra_air.back();
    int beyond = body_path_index - static_cast<int>(extra_air.size()) + 1;
    return last + 0.3 * beyond;
}

PropagationPath body_path(const BodyModel& body, const SynthGeometry& geom, int body_path_index) {
    size_t n_layers = body.layers.size();
    size_t crossed = n_layers - static_cast<size_t>(body_path_index) % n_layers;
    PropagationPath path;
    double body_distance = 0.0;
    for (size_t i = 0; i < crossed; ++i) {
        path.segments.push_back({body.layers[i], body.layers[i].thickness});
        body_distance += body.layers[i].thickness;
    }
    double air = geom.tx_rx_distance + geom.extra_air_for(body_path_index) - body_distance;
    path.air_distance = std::max(air, 1e-3);
    path.validate();
    return path;
}

std::vector<std::complex<double>> channel_response(const BodyModel& body,
                                                   const SynthGeometry& geom,
                                                   const std::vector<double>& subcarriers_hz) {
    if (subcarriers_hz.empty()) throw DomainError("subcarrier list must not be empty");
    if (geom.n_paths < 1) throw DomainError("need at least one propagation path");
    PropagationPath direct;
    direct.air_distance = geom.tx_rx_distance;
    direct.validate();

    std::vector<std::complex<double>> h(subcarriers_hz.size(), {0.0, 0.0});
    for (size_t sc = 0; sc < subcarriers_hz.size(); ++sc) {
        double f = subcarriers_hz[sc];
        std::complex<double> sum = received_signal(direct, {1.0, 0.0}, f);
        for (int p = 0; p + 1 < geom.n_paths; ++p) {
            sum += received_signal(body_path(body, geom, p), {1.0, 0.0}, f);
        }
        h[sc] = sum;
    }
    return h;
}

std::vector<double> make_subcarriers(double center_hz, double spacing_hz, int n) {
    if (n < 1) throw DomainError("need at least one subcarrier");
    std::vector<double> out(static_cast<size_t>(n));
    double mid = 0.5 * (n - 1);
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = center_hz + (i - mid) * spacing_hz;
    return out;
}

}  // namespace csisense
