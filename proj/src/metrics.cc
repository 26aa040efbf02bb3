#include "quanvnet/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "quanvnet/errors.h"

namespace quanvnet::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(double num, double den, const char* what, Warnings* warnings) {
    if (den == 0.0) {
        if (warnings) {
            warnings->push_back(std::string(what) + ": zero denominator, reported as 0");
        }
        return 0.0;
    }
    return num / den;
}

void check_class(const ConfusionMatrix& cm, std::size_t positive) {
    if (positive >= cm.n_classes()) {
        throw ConfigError("positive class " + std::to_string(positive) + " out of range");
    }
}

double d(std::uint64_t v) { return static_cast<double>(v); }

double sensitivity_of(const BinaryCounts& c, Warnings* w) { return ratio(d(c.tp), d(c.tp + c.fn), "sensitivity", w); }
double specificity_of(const BinaryCounts& c, Warnings* w) { return ratio(d(c.tn), d(c.tn + c.fp), "specificity", w); }
double precision_of(const BinaryCounts& c, Warnings* w) { return ratio(d(c.tp), d(c.tp + c.fp), "precision", w); }

double fbeta_of(const BinaryCounts& c, double beta, Convention convention, Warnings* w) {
    if (!(beta > 0)) {
        throw ConfigError("fbeta needs beta > 0");
    }
    const double p = precision_of(c, w), r = sensitivity_of(c, w);
    const double b2 = beta * beta;
    const double den = convention == Convention::Standard ? b2 * p + r : b2 * (p + r);
    return ratio((1 + b2) * p * r, den, "fbeta", w);
}

double balanced_of(const BinaryCounts& c, Convention convention, Warnings* w) {
    if (convention == Convention::Standard) {
        return (sensitivity_of(c, w) + specificity_of(c, w)) / 2;
    }
    return (ratio(d(c.tp), d(c.tp + c.fp), "balanced accuracy (paper)", w) +
            ratio(d(c.tn), d(c.tn + c.fn), "balanced accuracy (paper)", w)) /
           2;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {
    if (n_classes < 2) {
        throw ConfigError("confusion matrix needs at least 2 classes");
    }
}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes, std::vector<std::uint64_t> counts)
    : n_(n_classes), counts_(std::move(counts)) {
    if (n_classes < 2 || counts_.size() != n_classes * n_classes) {
        throw ConfigError("confusion matrix needs n >= 2 classes and n*n counts");
    }
}

ConfusionMatrix ConfusionMatrix::from_binary(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn, std::uint64_t fp) {
    return ConfusionMatrix(2, {tn, fp, fn, tp});
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
    if (truth >= n_ || predicted >= n_) {
        throw InputError("class index out of range for confusion matrix");
    }
    ++counts_[truth * n_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        t += at(i, i);
    }
    return t;
}

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t n_classes) {
    if (y_true.size() != y_pred.size()) {
        throw InputError("y_true and y_pred differ in length");
    }
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        cm.add(y_true[i], y_pred[i]);
    }
    return cm;
}

BinaryCounts binary_counts(const ConfusionMatrix& cm, std::size_t positive) {
    check_class(cm, positive);
    BinaryCounts c{};
    c.tp = cm.at(positive, positive);
    for (std::size_t k = 0; k < cm.n_classes(); ++k) {
        if (k == positive) continue;
        c.fn += cm.at(positive, k);
        c.fp += cm.at(k, positive);
    }
    c.tn = cm.total() - c.tp - c.fn - c.fp;
    return c;
}

double accuracy(const ConfusionMatrix& cm, Warnings* warnings) {
    return ratio(d(cm.trace()), d(cm.total()), "accuracy", warnings);
}

double sensitivity(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings) {
    return sensitivity_of(binary_counts(cm, positive), warnings);
}

double specificity(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings) {
    return specificity_of(binary_counts(cm, positive), warnings);
}

double precision(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings) {
    return precision_of(binary_counts(cm, positive), warnings);
}

double f1(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings) {
    const BinaryCounts c = binary_counts(cm, positive);
    // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN).
    return ratio(2 * d(c.tp), d(2 * c.tp + c.fp + c.fn), "f1", warnings);
}

double false_positive_rate(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings) {
    const BinaryCounts c = binary_counts(cm, positive);
    return ratio(d(c.fp), d(c.fp + c.tn), "false positive rate", warnings);
}

double balanced_accuracy(const ConfusionMatrix& cm, std::size_t positive, Convention convention, Warnings* warnings) {
    if (cm.n_classes() != 2) {
        throw ConfigError("balanced_accuracy needs a binary confusion matrix");
    }
    return balanced_of(binary_counts(cm, positive), convention, warnings);
}

double fbeta(const ConfusionMatrix& cm, std::size_t positive, double beta, Convention convention, Warnings* warnings) {
    return fbeta_of(binary_counts(cm, positive), beta, convention, warnings);
}

RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) {
        throw InputError("scores and labels differ in length");
    }
    std::uint64_t n_pos = 0, n_neg = 0;
    for (auto l : labels) {
        if (l > 1) {
            throw InputError("ROC labels must be 0 or 1");
        }
        (l ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw InputError("ROC needs at least one positive and one negative sample");
    }
    for (double s : scores) {
        if (std::isnan(s)) {
            throw InputError("ROC scores must not be NaN");
        }
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0, fp = 0;
    // Twice the area in units of one positive x one negative, accumulated exactly.
    std::uint64_t doubled_area = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        const std::uint64_t tp_before = tp, fp_before = fp;
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] ? tp : fp) += 1;
            ++i;
        }
        doubled_area += (fp - fp_before) * (tp + tp_before);
        curve.points.push_back({threshold, d(fp) / d(n_neg), d(tp) / d(n_pos)});
    }
    curve.auc = d(doubled_area) / (2.0 * d(n_pos) * d(n_neg));
    return curve;
}

const ClassMetrics& MetricsReport::headline() const {
    if (!positive) {
        throw ConfigError("report has no positive class");
    }
    return per_class.at(*positive);
}

MetricsReport per_class_report(const ConfusionMatrix& cm, std::span<const std::size_t> y_true,
                               const std::vector<std::vector<double>>& probas, const ReportOptions& options) {
    const std::size_t n = cm.n_classes();
    MetricsReport report;
    report.confusion = cm;
    report.beta = options.beta;
    report.positive = options.positive;
    if (options.positive) {
        check_class(cm, *options.positive);
    }
    if (options.class_names.empty()) {
        for (std::size_t k = 0; k < n; ++k) {
            report.class_names.push_back(std::to_string(k));
        }
    } else if (options.class_names.size() != n) {
        throw InputError("class name count does not match the confusion matrix");
    } else {
        report.class_names = options.class_names;
    }

    const bool have_scores = !probas.empty() || !y_true.empty();
    if (have_scores) {
        if (y_true.size() != probas.size() || y_true.size() != cm.total()) {
            throw InputError("labels, probabilities and confusion matrix disagree on the sample count");
        }
        for (const auto& row : probas) {
            if (row.size() != n) {
                throw InputError("probability rows must have one entry per class");
            }
        }
    }

    Warnings& w = report.warnings;
    report.accuracy = accuracy(cm, &w);
    for (std::size_t k = 0; k < n; ++k) {
        const BinaryCounts c = binary_counts(cm, k);
        ClassMetrics m;
        m.name = report.class_names[k];
        m.support = c.tp + c.fn;
        m.accuracy = ratio(d(c.tp + c.tn), d(cm.total()), "accuracy", &w);
        m.sensitivity = sensitivity_of(c, &w);
        m.specificity = specificity_of(c, &w);
        m.precision = precision_of(c, &w);
        m.f1 = ratio(2 * d(c.tp), d(2 * c.tp + c.fp + c.fn), "f1", &w);
        m.false_positive_rate = ratio(d(c.fp), d(c.fp + c.tn), "false positive rate", &w);
        m.balanced_accuracy = balanced_of(c, Convention::Standard, &w);
        m.fbeta = fbeta_of(c, options.beta, Convention::Standard, &w);
        m.auc = kNaN;
        if (have_scores) {
            std::vector<double> scores(y_true.size());
            std::vector<std::uint8_t> labels(y_true.size());
            for (std::size_t i = 0; i < y_true.size(); ++i) {
                scores[i] = probas[i][k];
                labels[i] = y_true[i] == k ? 1 : 0;
            }
            if (m.support > 0 && m.support < y_true.size()) {
                RocCurve curve = roc_auc(scores, labels);
                m.auc = curve.auc;
                report.roc.push_back(std::move(curve));
            } else {
                w.push_back("auc for class " + m.name + ": single-class input, omitted");
                report.roc.push_back(RocCurve{{}, kNaN});
            }
        }
        report.per_class.push_back(std::move(m));
    }

    double recall_sum = 0;
    ClassMetrics& macro = report.macro;
    macro.name = "macro";
    macro.support = cm.total();
    macro.auc = 0;
    for (const auto& m : report.per_class) {
        recall_sum += m.sensitivity;
        macro.accuracy += m.accuracy / d(n);
        macro.sensitivity += m.sensitivity / d(n);
        macro.specificity += m.specificity / d(n);
        macro.precision += m.precision / d(n);
        macro.f1 += m.f1 / d(n);
        macro.false_positive_rate += m.false_positive_rate / d(n);
        macro.balanced_accuracy += m.balanced_accuracy / d(n);
        macro.fbeta += m.fbeta / d(n);
        macro.auc += m.auc / d(n);
    }
    report.balanced_accuracy = recall_sum / d(n);
    if (n == 2) {
        const std::size_t pos = options.positive.value_or(1);
        report.paper_balanced_accuracy = balanced_of(binary_counts(cm, pos), Convention::PaperLiteral, &w);
        report.paper_fbeta = fbeta_of(binary_counts(cm, pos), options.beta, Convention::PaperLiteral, &w);
    } else {
        report.paper_balanced_accuracy = kNaN;
        report.paper_fbeta = kNaN;
    }
    return report;
}

MetricsReport evaluate_predictions(std::span<const std::size_t> y_true, const std::vector<std::vector<double>>& probas,
                                   const ReportOptions& options) {
    if (probas.empty()) {
        throw InputError("no predictions to evaluate");
    }
    const std::size_t n = probas.front().size();
    std::vector<std::size_t> y_pred;
    y_pred.reserve(probas.size());
    for (const auto& row : probas) {
        if (row.size() != n) {
            throw InputError("probability rows must have one entry per class");
        }
        y_pred.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    return per_class_report(confusion(y_true, y_pred, n), y_true, probas, options);
}

double to_percent(double value, Rounding rounding) {
    // The 1e-7 guard absorbs binary representation error (0.98 * 1000 = 979.999...).
    const double scaled = value * 1000.0;
    const double tenths = rounding == Rounding::Truncate ? std::floor(scaled + 1e-7) : std::floor(scaled + 0.5 + 1e-7);
    return tenths / 10.0;
}

std::string format_percent(double value, Rounding rounding) {
    if (std::isnan(value)) {
        return "";
    }
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << to_percent(value, rounding);
    return out.str();
}

namespace {

nlohmann::json class_json(const ClassMetrics& m) {
    return {{"name", m.name},
            {"support", m.support},
            {"accuracy", m.accuracy},
            {"sensitivity", m.sensitivity},
            {"specificity", m.specificity},
            {"precision", m.precision},
            {"f1", m.f1},
            {"false_positive_rate", m.false_positive_rate},
            {"balanced_accuracy", m.balanced_accuracy},
            {"fbeta", m.fbeta},
            {"auc", m.auc}};
}

void csv_row(std::ostringstream& out, const std::string& scope, const ClassMetrics& m, Rounding r) {
    out << scope << ',' << m.name << ',' << format_percent(m.accuracy, r) << ',' << format_percent(m.sensitivity, r)
        << ',' << format_percent(m.specificity, r) << ',' << format_percent(m.precision, r) << ','
        << format_percent(m.f1, r) << ',' << format_percent(m.balanced_accuracy, r) << ','
        << format_percent(m.fbeta, r) << ',' << format_percent(m.false_positive_rate, r) << ','
        << format_percent(m.auc, r) << ',' << m.support << '\n';
}

}  // namespace

std::string report_json(const MetricsReport& report) {
    nlohmann::json doc;
    doc["classes"] = report.class_names;
    nlohmann::json grid = nlohmann::json::array();
    for (std::size_t t = 0; t < report.confusion.n_classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < report.confusion.n_classes(); ++p) {
            row.push_back(report.confusion.at(t, p));
        }
        grid.push_back(row);
    }
    doc["confusion_matrix"] = grid;
    doc["accuracy"] = report.accuracy;
    doc["balanced_accuracy"] = report.balanced_accuracy;
    doc["beta"] = report.beta;
    doc["per_class"] = nlohmann::json::array();
    for (const auto& m : report.per_class) {
        doc["per_class"].push_back(class_json(m));
    }
    doc["macro"] = class_json(report.macro);
    if (report.positive) {
        doc["positive_class"] = report.class_names[*report.positive];
        nlohmann::json headline = class_json(report.headline());
        headline["accuracy"] = report.accuracy;
        doc["binary"] = headline;
    } else {
        doc["positive_class"] = nullptr;
    }
    doc["paper_literal"] = {{"balanced_accuracy", report.paper_balanced_accuracy}, {"fbeta", report.paper_fbeta}};
    doc["warnings"] = report.warnings;
    return doc.dump(2);
}

std::string report_csv(const MetricsReport& report, Rounding rounding) {
    std::ostringstream out;
    out << "scope,class,acc,sns,spc,prc,f1,bal_acc,fbeta,fpr,auc,support\n";
    if (report.positive) {
        ClassMetrics overall = report.headline();
        overall.accuracy = report.accuracy;
        csv_row(out, "binary", overall, rounding);
    }
    for (const auto& m : report.per_class) {
        csv_row(out, "class", m, rounding);
    }
    ClassMetrics macro = report.macro;
    macro.accuracy = report.accuracy;  // plain top-1 accuracy
    csv_row(out, "overall", macro, rounding);
    return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto& n : class_names) {
        out << ',' << n;
    }
    out << '\n';
    for (std::size_t t = 0; t < cm.n_classes(); ++t) {
        out << class_names.at(t);
        for (std::size_t p = 0; p < cm.n_classes(); ++p) {
            out << ',' << cm.at(t, p);
        }
        out << '\n';
    }
    return out.str();
}

std::string roc_csv(const RocCurve& curve) {
    std::ostringstream out;
    out.precision(17);
    out << "threshold,fpr,tpr\n";
    for (const auto& p : curve.points) {
        out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
    }
    return out.str();
}

}  // namespace quanvnet::metrics
