#include "emovox/evaluation.hpp"

#include "emovox/csv.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace emovox {

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return t;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

std::size_t ConfusionMatrix::row_sum(int c) const {
    const auto& row = counts.at(static_cast<std::size_t>(c));
    return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::col_sum(int c) const {
    std::size_t t = 0;
    for (const auto& row : counts) t += row.at(static_cast<std::size_t>(c));
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
    if (y_true.size() != y_pred.size()) throw InputError("confusion matrix: y_true and y_pred lengths differ");
    if (n_classes < 1) throw InputError("confusion matrix: n_classes must be positive");
    ConfusionMatrix cm;
    const auto n = static_cast<std::size_t>(n_classes);
    cm.counts.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes) {
            throw InputError("confusion matrix: label out of range at row " + std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
    }
    return cm;
}

ClassReport class_report(const ConfusionMatrix& cm) {
    ClassReport r;
    const int n = cm.n_classes();
    auto ratio = [&r](double num, double den) {
        if (den == 0.0) {
            ++r.zero_division;
            return 0.0;
        }
        return num / den;
    };
    for (int c = 0; c < n; ++c) {
        ClassMetrics m;
        const double tp = static_cast<double>(cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]);
        m.support = cm.row_sum(c);
        m.precision = ratio(tp, static_cast<double>(cm.col_sum(c)));
        m.recall = ratio(tp, static_cast<double>(m.support));
        m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
        r.support += m.support;
        r.per_class.push_back(m);
    }
    if (n > 0) {
        r.macro_precision /= n;
        r.macro_recall /= n;
        r.macro_f1 /= n;
    }
    r.accuracy = ratio(static_cast<double>(cm.trace()), static_cast<double>(cm.total()));
    if (r.zero_division > 0) warn("classification report: " + std::to_string(r.zero_division) + " metric(s) set to 0 on empty denominators");
    return r;
}

namespace {

struct Sweep {
    std::vector<double> thresholds;
    std::vector<double> tps;
    std::vector<double> fps;
    double positives = 0.0;
    double negatives = 0.0;
};

// Cumulative true/false positive counts at each distinct score, highest first.
Sweep sweep(std::span<const int> y_true, const Matrix& scores, int c) {
    const auto n = y_true.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores(static_cast<Eigen::Index>(a), c) > scores(static_cast<Eigen::Index>(b), c);
    });
    Sweep s;
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = order[i];
        if (y_true[row] == c) tp += 1.0;
        else fp += 1.0;
        const double score = scores(static_cast<Eigen::Index>(row), c);
        const bool group_end = i + 1 == n || scores(static_cast<Eigen::Index>(order[i + 1]), c) != score;
        if (group_end) {
            s.thresholds.push_back(score);
            s.tps.push_back(tp);
            s.fps.push_back(fp);
        }
    }
    s.positives = tp;
    s.negatives = fp;
    return s;
}

void check_scores(std::span<const int> y_true, const Matrix& scores) {
    if (static_cast<std::size_t>(scores.rows()) != y_true.size()) throw InputError("curves: score rows do not match labels");
    if (scores.cols() < 1) throw InputError("curves: scores need one column per class");
    for (int y : y_true) {
        if (y < 0 || y >= scores.cols()) throw InputError("curves: label out of range");
    }
}

void finish_macro(CurveSet& set) {
    double sum = 0.0;
    int defined = 0;
    for (const auto& c : set.per_class) {
        if (c.summary) {
            sum += *c.summary;
            ++defined;
        }
    }
    if (defined > 0) set.macro = sum / defined;
}

}  // namespace

CurveSet roc_auc(std::span<const int> y_true, const Matrix& scores) {
    check_scores(y_true, scores);
    CurveSet set;
    for (int c = 0; c < scores.cols(); ++c) {
        const Sweep s = sweep(y_true, scores, c);
        ClassCurve curve;
        curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
        if (s.positives == 0.0 || s.negatives == 0.0) {
            set.notes.push_back("class " + std::to_string(c) + (s.positives == 0.0 ? " has no positive samples" : " has no negative samples") +
                                "; ROC AUC undefined");
            set.per_class.push_back(curve);
            continue;
        }
        double auc = 0.0;
        for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
            const CurvePoint p{s.fps[i] / s.negatives, s.tps[i] / s.positives, s.thresholds[i]};
            const CurvePoint& q = curve.points.back();
            auc += (p.x - q.x) * (p.y + q.y) / 2.0;
            curve.points.push_back(p);
        }
        curve.summary = auc;
        set.per_class.push_back(std::move(curve));
    }
    finish_macro(set);
    return set;
}

CurveSet pr_average_precision(std::span<const int> y_true, const Matrix& scores) {
    check_scores(y_true, scores);
    CurveSet set;
    for (int c = 0; c < scores.cols(); ++c) {
        const Sweep s = sweep(y_true, scores, c);
        ClassCurve curve;
        if (s.positives == 0.0) {
            set.notes.push_back("class " + std::to_string(c) + " has no positive samples; average precision undefined");
            set.per_class.push_back(curve);
            continue;
        }
        curve.points.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});
        double ap = 0.0;
        double prev_recall = 0.0;
        for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
            const double recall = s.tps[i] / s.positives;
            const double precision = s.tps[i] / (s.tps[i] + s.fps[i]);
            ap += (recall - prev_recall) * precision;
            prev_recall = recall;
            curve.points.push_back({recall, precision, s.thresholds[i]});
        }
        curve.summary = ap;
        set.per_class.push_back(std::move(curve));
    }
    finish_macro(set);
    return set;
}

std::vector<PredictionErrorRow> class_prediction_error(const ConfusionMatrix& cm) {
    std::vector<PredictionErrorRow> rows;
    for (int c = 0; c < cm.n_classes(); ++c) {
        PredictionErrorRow row;
        row.predicted = cm.counts[static_cast<std::size_t>(c)];
        row.misclassified = cm.row_sum(c) - row.predicted[static_cast<std::size_t>(c)];
        rows.push_back(std::move(row));
    }
    return rows;
}

Evaluation evaluate(const ReportBundle& bundle) {
    const int n = static_cast<int>(bundle.class_names.size());
    if (bundle.scores.cols() != n) throw InputError("evaluation: score columns do not match class count");
    Evaluation ev;
    ev.confusion = confusion_matrix(bundle.y_true, bundle.y_pred, n);
    ev.report = class_report(ev.confusion);
    ev.roc = roc_auc(bundle.y_true, bundle.scores);
    ev.pr = pr_average_precision(bundle.y_true, bundle.scores);
    ev.prediction_error = class_prediction_error(ev.confusion);
    return ev;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string fmt(double v) { return csv::format_double(v); }

// Minimal SVG plotting: unit-square data mapped into a fixed canvas.
class Svg {
public:
    Svg(std::string title, std::string x_label, std::string y_label) {
        body_ << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
        body_ << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
        body_ << "<line x1=\"" << kL << "\" y1=\"" << kB << "\" x2=\"" << kR << "\" y2=\"" << kB << "\" stroke=\"black\"/>\n";
        body_ << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kB << "\" stroke=\"black\"/>\n";
        body_ << "<text x=\"" << (kL + kR) / 2 << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";
        body_ << "<text x=\"14\" y=\"" << (kT + kB) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << (kT + kB) / 2
              << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
        for (int t = 0; t <= 4; ++t) {
            const double v = t / 4.0;
            body_ << "<text x=\"" << px(v) << "\" y=\"" << kB + 14 << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(v) << "</text>\n";
            body_ << "<text x=\"" << kL - 4 << "\" y=\"" << py(v) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v) << "</text>\n";
        }
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, std::size_t color, const std::string& label) {
        body_ << "<polyline fill=\"none\" stroke=\"" << palette(color) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            body_ << (i ? " " : "") << px(pts[i].first) << ',' << py(pts[i].second);
        }
        body_ << "\"/>\n";
        const int ly = kT + 14 * static_cast<int>(legend_++);
        body_ << "<text x=\"" << kR + 8 << "\" y=\"" << ly + 10 << "\" font-size=\"11\" fill=\"" << palette(color) << "\">" << escape(label) << "</text>\n";
    }

    void rect(double x0, double y0, double x1, double y1, const std::string& fill) {
        body_ << "<rect x=\"" << px(x0) << "\" y=\"" << py(y1) << "\" width=\"" << px(x1) - px(x0) << "\" height=\"" << py(y0) - py(y1)
              << "\" fill=\"" << fill << "\" stroke=\"white\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 11) {
        body_ << "<text x=\"" << px(x) << "\" y=\"" << py(y) << "\" text-anchor=\"middle\" font-size=\"" << size << "\">" << escape(s) << "</text>\n";
    }

    void save(const std::filesystem::path& path) const {
        auto out = open_out(path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n" << body_.str() << "</svg>\n";
    }

    static std::string palette(std::size_t i) {
        static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
        return colors[i % 8];
    }

private:
    static constexpr int kW = 640, kH = 480, kL = 60, kR = 500, kT = 40, kB = 430;
    static int px(double x) { return kL + static_cast<int>(std::lround(std::clamp(x, 0.0, 1.0) * (kR - kL))); }
    static int py(double y) { return kB - static_cast<int>(std::lround(std::clamp(y, 0.0, 1.0) * (kB - kT))); }
    static std::string escape(const std::string& s) {
        std::string r;
        for (char ch : s) {
            if (ch == '<') r += "&lt;";
            else if (ch == '>') r += "&gt;";
            else if (ch == '&') r += "&amp;";
            else r += ch;
        }
        return r;
    }

    std::ostringstream body_;
    std::size_t legend_ = 0;
};

void write_curves(const std::filesystem::path& dir, const std::string& prefix, const CurveSet& set, const std::vector<std::string>& names,
                  const std::string& x_name, const std::string& y_name, const std::string& title) {
    Svg svg(title, x_name, y_name);
    for (std::size_t c = 0; c < set.per_class.size(); ++c) {
        const auto& curve = set.per_class[c];
        auto out = open_out(dir / (prefix + "_" + names[c] + ".csv"));
        out << "threshold," << x_name << ',' << y_name << '\n';
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : curve.points) {
            out << fmt(p.threshold) << ',' << fmt(p.x) << ',' << fmt(p.y) << '\n';
            pts.emplace_back(p.x, p.y);
        }
        const std::string label = names[c] + (curve.summary ? " " + fmt(std::round(*curve.summary * 1000.0) / 1000.0) : " n/a");
        svg.polyline(pts, c, label);
    }
    svg.save(dir / (prefix + ".svg"));
}

}  // namespace

nlohmann::json evaluation_to_json(const ReportBundle& bundle, const Evaluation& ev) {
    nlohmann::json j;
    j["n_samples"] = ev.report.support;
    j["accuracy"] = ev.report.accuracy;
    j["macro_precision"] = ev.report.macro_precision;
    j["macro_recall"] = ev.report.macro_recall;
    j["macro_f1"] = ev.report.macro_f1;
    j["macro_auc"] = optional_json(ev.roc.macro);
    j["macro_average_precision"] = optional_json(ev.pr.macro);
    j["zero_division_count"] = ev.report.zero_division;
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < bundle.class_names.size(); ++c) {
        const auto& m = ev.report.per_class[c];
        classes.push_back({{"name", bundle.class_names[c]},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support},
                           {"auc", optional_json(ev.roc.per_class[c].summary)},
                           {"average_precision", optional_json(ev.pr.per_class[c].summary)},
                           {"misclassified", ev.prediction_error[c].misclassified}});
    }
    j["classes"] = classes;
    j["confusion"] = ev.confusion.counts;
    nlohmann::json notes = nlohmann::json::array();
    for (const auto& n : ev.roc.notes) notes.push_back(n);
    for (const auto& n : ev.pr.notes) notes.push_back(n);
    j["notes"] = notes;
    return j;
}

Evaluation render_report(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
    Evaluation ev = evaluate(bundle);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
    const auto& names = bundle.class_names;
    const std::size_t n = names.size();

    {
        auto out = open_out(out_dir / "report.json");
        out << evaluation_to_json(bundle, ev).dump(2) << '\n';
    }
    {
        auto out = open_out(out_dir / "confusion.csv");
        out << "true\\predicted";
        for (const auto& name : names) out << ',' << csv::escape(name);
        out << '\n';
        for (std::size_t t = 0; t < n; ++t) {
            out << csv::escape(names[t]);
            for (std::size_t p = 0; p < n; ++p) out << ',' << ev.confusion.counts[t][p];
            out << '\n';
        }
    }
    {
        auto out = open_out(out_dir / "report.csv");
        out << "class,precision,recall,f1,support\n";
        for (std::size_t c = 0; c < n; ++c) {
            const auto& m = ev.report.per_class[c];
            out << csv::escape(names[c]) << ',' << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.f1) << ',' << m.support << '\n';
        }
        out << "macro avg," << fmt(ev.report.macro_precision) << ',' << fmt(ev.report.macro_recall) << ',' << fmt(ev.report.macro_f1) << ','
            << ev.report.support << '\n';
        out << "accuracy,,," << fmt(ev.report.accuracy) << ',' << ev.report.support << '\n';
    }
    {
        auto out = open_out(out_dir / "class_prediction_error.csv");
        out << "true_class";
        for (const auto& name : names) out << ',' << csv::escape(name);
        out << ",misclassified\n";
        for (std::size_t c = 0; c < n; ++c) {
            out << csv::escape(names[c]);
            for (auto v : ev.prediction_error[c].predicted) out << ',' << v;
            out << ',' << ev.prediction_error[c].misclassified << '\n';
        }
    }
    write_curves(out_dir, "roc", ev.roc, names, "fpr", "tpr", "ROC (one-vs-rest)");
    write_curves(out_dir, "pr", ev.pr, names, "recall", "precision", "Precision-recall (one-vs-rest)");

    // Confusion heatmap.
    {
        Svg svg("Confusion matrix (rows true, columns predicted)", "predicted", "true");
        std::size_t peak = 1;
        for (const auto& row : ev.confusion.counts)
            for (auto v : row) peak = std::max(peak, v);
        const double cell = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t p = 0; p < n; ++p) {
                const auto v = ev.confusion.counts[t][p];
                const int shade = 255 - static_cast<int>(std::lround(200.0 * static_cast<double>(v) / static_cast<double>(peak)));
                std::ostringstream fill;
                fill << "rgb(" << shade << ',' << shade << ",255)";
                const double x0 = static_cast<double>(p) * cell;
                const double y1 = 1.0 - static_cast<double>(t) * cell;
                svg.rect(x0, y1 - cell, x0 + cell, y1, fill.str());
                svg.text(x0 + cell / 2, y1 - cell / 2, std::to_string(v));
            }
        }
        svg.save(out_dir / "confusion.svg");
    }
    // Stacked bars of predicted classes per true class.
    {
        Svg svg("Class prediction error", "true class", "fraction of samples");
        const double width = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
        for (std::size_t t = 0; t < n; ++t) {
            const double total = static_cast<double>(std::max<std::size_t>(ev.confusion.row_sum(static_cast<int>(t)), 1));
            double base = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                const double h = static_cast<double>(ev.prediction_error[t].predicted[p]) / total;
                if (h > 0.0) svg.rect(static_cast<double>(t) * width, base, (static_cast<double>(t) + 0.9) * width, base + h, Svg::palette(p));
                base += h;
            }
        }
        std::vector<std::pair<double, double>> none;
        for (std::size_t p = 0; p < n; ++p) svg.polyline(none, p, "pred " + names[p]);
        svg.save(out_dir / "class_prediction_error.svg");
    }
    // Per-class metrics as grouped bars.
    {
        Svg svg("Classification report", "class", "score");
        const double width = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
        for (std::size_t c = 0; c < n; ++c) {
            const auto& m = ev.report.per_class[c];
            const double x = static_cast<double>(c) * width;
            const double values[] = {m.precision, m.recall, m.f1};
            for (std::size_t k = 0; k < 3; ++k) {
                svg.rect(x + static_cast<double>(k) * width * 0.3, 0.0, x + static_cast<double>(k + 1) * width * 0.3, values[k], Svg::palette(k));
            }
        }
        std::vector<std::pair<double, double>> none;
        svg.polyline(none, 0, "precision");
        svg.polyline(none, 1, "recall");
        svg.polyline(none, 2, "f1");
        svg.save(out_dir / "report.svg");
    }
    if (!bundle.learning_curve.empty()) {
        auto out = open_out(out_dir / "learning_curve.csv");
        out << "fraction,train_size,train_score,cv_score\n";
        std::vector<std::pair<double, double>> train, cv;
        for (const auto& p : bundle.learning_curve) {
            out << fmt(p.fraction) << ',' << p.train_size << ',' << fmt(p.train_score) << ',' << fmt(p.cv_score) << '\n';
            train.emplace_back(p.fraction, p.train_score);
            cv.emplace_back(p.fraction, p.cv_score);
        }
        Svg svg("Learning curve", "training fraction", "accuracy");
        svg.polyline(train, 0, "training score");
        svg.polyline(cv, 1, "cross-validation score");
        svg.save(out_dir / "learning_curve.svg");
    }
    return ev;
}

}  // namespace emovox
