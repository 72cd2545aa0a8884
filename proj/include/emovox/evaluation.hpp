#pragma once

#include "emovox/common.hpp"
#include "emovox/model_select.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emovox {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts;

    int n_classes() const { return static_cast<int>(counts.size()); }
    std::size_t total() const;
    std::size_t trace() const;
    std::size_t row_sum(int c) const;
    std::size_t col_sum(int c) const;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassReport {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::size_t support = 0;
    int zero_division = 0;  // metrics defined as 0 because of an empty denominator
};

ClassReport class_report(const ConfusionMatrix& cm);

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
    double threshold = 0.0;
};

/// One-vs-rest curve for one class. summary is AUC (roc) or average precision (pr).
struct ClassCurve {
    std::vector<CurvePoint> points;
    std::optional<double> summary;  // empty when the class is absent from y_true
};

struct CurveSet {
    std::vector<ClassCurve> per_class;
    std::optional<double> macro;  // mean over defined classes
    std::vector<std::string> notes;
};

/// ROC per class over distinct score thresholds; points are (fpr, tpr).
CurveSet roc_auc(std::span<const int> y_true, const Matrix& scores);
/// Precision-recall per class; points are (recall, precision). AP = sum (R_i - R_{i-1}) P_i.
CurveSet pr_average_precision(std::span<const int> y_true, const Matrix& scores);

struct PredictionErrorRow {
    std::vector<std::size_t> predicted;  // counts per predicted class
    std::size_t misclassified = 0;
};

std::vector<PredictionErrorRow> class_prediction_error(const ConfusionMatrix& cm);

/// Everything needed to evaluate one model on one split.
struct ReportBundle {
    std::vector<std::string> class_names;
    std::vector<int> y_true;
    std::vector<int> y_pred;
    Matrix scores;  // one column per class
    std::vector<LearningCurvePoint> learning_curve;
};

struct Evaluation {
    ConfusionMatrix confusion;
    ClassReport report;
    CurveSet roc;
    CurveSet pr;
    std::vector<PredictionErrorRow> prediction_error;
};

Evaluation evaluate(const ReportBundle& bundle);

nlohmann::json evaluation_to_json(const ReportBundle& bundle, const Evaluation& ev);

/// Writes report.json, confusion.csv, report.csv, roc_<class>.csv, pr_<class>.csv,
/// class_prediction_error.csv, learning_curve.csv (when present) and SVG views.
Evaluation render_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace emovox
