#include "csisense/report.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "csisense/errors.hpp"

namespace csisense {

using nlohmann::json;

namespace {

json regression_to_json(const RegressionReport& r) {
    json j;
    j["subjects"] = r.subjects;
    j["subject_mae"] = r.subject_mae;
    j["subject_sd"] = r.subject_sd;
    j["mae_per_dim"] = r.mae_per_dim;
    j["msd_per_dim"] = r.msd_per_dim;
    j["mae"] = r.mae;
    j["msd"] = r.msd;
    return j;
}

RegressionReport regression_from_json(const json& j) {
    RegressionReport r;
    r.subjects = j.at("subjects").get<std::vector<int>>();
    r.subject_mae = j.at("subject_mae").get<std::vector<std::vector<double>>>();
    r.subject_sd = j.at("subject_sd").get<std::vector<std::vector<double>>>();
    r.mae_per_dim = j.at("mae_per_dim").get<std::vector<double>>();
    r.msd_per_dim = j.at("msd_per_dim").get<std::vector<double>>();
    r.mae = j.at("mae").get<double>();
    r.msd = j.at("msd").get<double>();
    return r;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void write_confusion_csv(const EvalReport& rep, const std::string& dir) {
    std::string content = "predicted_class";
    for (int j = 0; j < rep.cm.n_classes; ++j) content += ",true_" + std::to_string(j);
    content += "\n";
    for (int i = 0; i < rep.cm.n_classes; ++i) {
        content += std::to_string(i);
        for (int j = 0; j < rep.cm.n_classes; ++j) content += "," + std::to_string(rep.cm.at(i, j));
        content += "\n";
    }
    write_file(dir + "/confusion_" + rep.task + ".csv", content);
}

void write_radar_csv(const EvalReport& rep, const std::string& dir) {
    std::string content =
        "subject,fat_est,muscle_est,water_est,bone_est,fat_truth,muscle_truth,water_truth,bone_"
        "truth\n";
    for (const auto& row : rep.radar) {
        content += std::to_string(row.subject);
        for (double v : row.estimated) content += "," + json(v).dump();
        for (double v : row.truth) content += "," + json(v).dump();
        content += "\n";
    }
    write_file(dir + "/radar_" + rep.task + ".csv", content);
}

void write_summary(const std::vector<EvalReport>& reports, const std::string& dir) {
    std::string s = "task            accuracy    baseline    mAE       mSD\n";
    char line[160];
    for (const auto& r : reports) {
        std::string acc = r.has_classification ? json(r.accuracy).dump() : "-";
        std::string base = r.baseline_accuracy >= 0 ? json(r.baseline_accuracy).dump() : "-";
        std::string mae = r.has_regression ? json(r.regression.mae).dump() : "-";
        std::string msd = r.has_regression ? json(r.regression.msd).dump() : "-";
        std::snprintf(line, sizeof(line), "%-15s %-11s %-11s %-9s %s\n", r.task.c_str(),
                      acc.c_str(), base.c_str(), mae.c_str(), msd.c_str());
        s += line;
    }
    write_file(dir + "/summary.txt", s);
}

}  // namespace

std::string reports_to_json(const std::vector<EvalReport>& reports) {
    json root;
    root["schema_version"] = 1;
    root["tasks"] = json::array();
    for (const auto& r : reports) {
        json t;
        t["task"] = r.task;
        if (r.has_classification) {
            json c;
            c["n_classes"] = r.cm.n_classes;
            c["counts"] = r.cm.counts;
            c["accuracy"] = r.accuracy;
            c["per_class_rate"] = per_class_rate(r.cm);
            if (r.baseline_accuracy >= 0) c["naive_bayes_accuracy"] = r.baseline_accuracy;
            t["classification"] = c;
        }
        if (r.has_regression) {
            t["regression"] = regression_to_json(r.regression);
            json radar = json::array();
            for (const auto& row : r.radar) {
                radar.push_back(
                    {{"subject", row.subject}, {"estimated", row.estimated}, {"truth", row.truth}});
            }
            t["radar"] = radar;
        }
        root["tasks"].push_back(t);
    }
    return root.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json_file(const std::string& metrics_path) {
    std::ifstream in(metrics_path);
    if (!in) throw IoError("cannot open metrics file: " + metrics_path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw ParseError(std::string("metrics file is not valid json: ") + e.what());
    }
    if (root.value("schema_version", 0) != 1)
        throw ParseError("unsupported metrics schema version in " + metrics_path);
    std::vector<EvalReport> out;
    for (const auto& t : root.at("tasks")) {
        EvalReport r;
        r.task = t.at("task").get<std::string>();
        if (t.contains("classification")) {
            const auto& c = t.at("classification");
            r.has_classification = true;
            r.cm.n_classes = c.at("n_classes").get<int>();
            r.cm.counts = c.at("counts").get<std::vector<int64_t>>();
            r.accuracy = c.at("accuracy").get<double>();
            if (c.contains("naive_bayes_accuracy"))
                r.baseline_accuracy = c.at("naive_bayes_accuracy").get<double>();
        }
        if (t.contains("regression")) {
            r.has_regression = true;
            r.regression = regression_from_json(t.at("regression"));
            for (const auto& row : t.at("radar")) {
                RadarRow rr;
                rr.subject = row.at("subject").get<int>();
                rr.estimated = row.at("estimated").get<std::array<double, 4>>();
                rr.truth = row.at("truth").get<std::array<double, 4>>();
                r.radar.push_back(rr);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

void export_report(const std::vector<EvalReport>& reports, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/metrics.json", reports_to_json(reports));
    for (const auto& r : reports) {
        if (r.has_classification) write_confusion_csv(r, out_dir);
        if (r.has_regression) write_radar_csv(r, out_dir);
    }
    write_summary(reports, out_dir);
}

void export_from_metrics(const std::string& metrics_path, const std::string& out_dir) {
    auto reports = reports_from_json_file(metrics_path);
    std::filesystem::create_directories(out_dir);
    for (const auto& r : reports) {
        if (r.has_classification) write_confusion_csv(r, out_dir);
        if (r.has_regression) write_radar_csv(r, out_dir);
    }
    write_summary(reports, out_dir);
}

}  // namespace csisense
