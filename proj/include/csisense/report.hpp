#pragma once

#include <array>
#include <string>
#include <vector>

#include "csisense/metrics.hpp"

namespace csisense {

// Per-subject radar data: mean estimated biometrics against the truth,
// one row per subject, axes fat/muscle/water/bone.
struct RadarRow {
    int subject = 0;
    std::array<double, 4> estimated{};
    std::array<double, 4> truth{};
};

struct EvalReport {
    std::string task;

    bool has_classification = false;
    ConfusionMatrix cm;
    double accuracy = 0.0;
    double baseline_accuracy = -1.0;  // Gaussian naive Bayes; -1 when not evaluated

    bool has_regression = false;
    RegressionReport regression;
    std::vector<RadarRow> radar;
};

// Writes metrics.json (versioned schema) plus per-task comma-separated
// radar and confusion exports into out_dir.
void export_report(const std::vector<EvalReport>& reports, const std::string& out_dir);

// Serialized form of export_report's metrics.json.
std::string reports_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_json_file(const std::string& metrics_path);

// Regenerates the plot-data exports (radar/confusion CSVs and a summary
// table) from an existing metrics.json.
void export_from_metrics(const std::string& metrics_path, const std::string& out_dir);

}  // namespace csisense
