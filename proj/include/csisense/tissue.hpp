#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace csisense {

inline constexpr double kSpeedOfLight = 299792458.0;            // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12; // F/m
inline constexpr double kVacuumPermeability = 1.25663706212e-6; // H/m

enum class Band { GHz24, GHz5 };

const char* band_name(Band b);
Band band_from_name(const std::string& name);

enum class TissueKind {
    SkinDry,
    SkinWet,
    FatInfiltrated,
    FatNotInfiltrated,
    Muscle,
    BoneCortical,
    BoneCancellous,
};

const char* tissue_kind_name(TissueKind k);
TissueKind tissue_kind_from_name(const std::string& name);

// One homogeneous propagation medium. Relative constants; air is the
// default-constructed layer with thickness set by the caller.
struct TissueLayer {
    std::string name = "air";
    double rel_permittivity = 1.0;  // >= 1
    double conductivity = 0.0;      // S/m, >= 0
    double rel_permeability = 1.0;
    double thickness = 0.0;         // m, > 0

    void validate() const;
};

TissueLayer air_layer(double thickness);

struct DielectricEntry {
    TissueKind kind;
    Band band;
    double permittivity;
    double conductivity;  // S/m
};

// Measured dielectric constants of body tissues in the two WiFi bands.
// The builtin table has exactly 14 rows (7 tissues x 2 bands) and is also
// shipped as data/tissue_dielectrics.csv.
class DielectricTable {
public:
    static const DielectricTable& builtin();
    static DielectricTable from_csv(const std::string& path);
    void write_csv(const std::string& path) const;

    const DielectricEntry& lookup(TissueKind kind, Band band) const;
    const std::vector<DielectricEntry>& entries() const { return entries_; }

    // Layer with the table's constants for the given kind/band.
    TissueLayer make_layer(TissueKind kind, Band band, double thickness) const;

    bool operator==(const DielectricTable& other) const;

private:
    std::vector<DielectricEntry> entries_;
};

struct PathSegment {
    TissueLayer medium;
    double distance = 0.0;  // m, > 0; may differ from medium.thickness (oblique crossing)
};

// Ordered media crossed by one propagation path, plus the total distance
// travelled through air.
struct PropagationPath {
    std::vector<PathSegment> segments;
    double air_distance = 0.0;  // d0, m, > 0

    void validate() const;
};

struct SubjectProfile {
    int id = 0;
    std::string sex;
    double fat_rate = 0.0;     // percent
    double muscle_rate = 0.0;  // percent
    double water_rate = 0.0;   // percent
    double bone_rate = 0.0;    // percent
    double height_in = 0.0;    // inches
    double weight_lbs = 0.0;   // lbs

    std::array<float, 4> biometrics() const {
        return {static_cast<float>(fat_rate), static_cast<float>(muscle_rate),
                static_cast<float>(water_rate), static_cast<float>(bone_rate)};
    }
};

// The 30 bundled subjects, also shipped as data/subjects.csv.
const std::vector<SubjectProfile>& builtin_subjects();
std::vector<SubjectProfile> subjects_from_csv(const std::string& path);
void subjects_write_csv(const std::vector<SubjectProfile>& subjects, const std::string& path);
const SubjectProfile& subject_by_id(int id);

// Skin/fat/muscle cylinder.
struct BodyModel {
    std::vector<TissueLayer> layers;

    double total_thickness() const;
    void validate() const;
};

// v = c0 / sqrt(mu_r * eps_r).
double wave_speed(const TissueLayer& layer);

// Sum of per-segment d/v, including the air segment.
double time_delay(const PropagationPath& path);

// Per-layer amplitude decay c = exp(-alpha * d) with the low-loss
// approximation alpha = (sigma/2) * sqrt(mu/eps) in absolute units.
// Lossless media give exactly 1.
double attenuation_coefficient(const TissueLayer& layer);

// Free-space amplitude factor lambda / (4 pi d0), clamped to 1 in the
// near field so the decay chain stays in (0, 1].
double free_space_decay(double frequency_hz, double air_distance_m);

// A' = A * c0 * prod(c_i) for the given carrier frequency.
double power_decay(const PropagationPath& path, double amplitude, double frequency_hz);

// y = prod(c_i) * c0 * exp(-j 2 pi f t) * x with t = time_delay(path).
// |y| equals power_decay(path, |x|, f) exactly.
std::complex<double> received_signal(const PropagationPath& path, std::complex<double> x,
                                     double frequency_hz);

// Frequency change from subject motion: +-(v_o / v) * f.
double doppler_shift(double carrier_hz, double object_speed, double wave_speed,
                     bool approaching);

// mod(2 pi d / lambda, 2 pi), always in [0, 2 pi).
double phase_variation(double distance_m, double wavelength_m);

// Deterministic biometrics -> 3-layer cylinder mapping: 2 mm dry skin,
// fat thickness 5 mm * fat_rate / 20, muscle thickness 30 mm * muscle_rate / 78,
// constants looked up per band.
BodyModel subject_to_body(const SubjectProfile& profile, Band band,
                          const DielectricTable& table = DielectricTable::builtin());

struct SynthGeometry {
    double tx_rx_distance = 1.6;  // m
    int n_paths = 3;              // 1 direct air path + (n_paths - 1) body paths

    // Extra air distance of the i-th body path relative to the direct path.
    // Paths beyond the list extend it in 0.3 m steps.
    std::vector<double> extra_air = {0.2, 0.5};

    double extra_air_for(int body_path_index) const;
};

// Per-path propagation geometry for one body path; the rest of the distance
// is air. Crossing depth cycles with the path index: path 0 penetrates the
// full layer stack, path 1 turns back before the deepest layer (a reflection
// at the muscle interface, where the permittivity step is largest), and so
// on. Deeper layers attenuate hard, so the shallow paths are what keeps the
// outer-layer geometry visible in the channel.
PropagationPath body_path(const BodyModel& body, const SynthGeometry& geom, int body_path_index);

// Multipath channel of a static scene: direct air path plus body paths.
std::vector<std::complex<double>> channel_response(const BodyModel& body,
                                                   const SynthGeometry& geom,
                                                   const std::vector<double>& subcarriers_hz);

// Evenly spaced subcarrier frequencies centred on center_hz.
std::vector<double> make_subcarriers(double center_hz, double spacing_hz, int n);

}  // namespace csisense
