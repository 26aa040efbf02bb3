#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace quanvnet::metrics {

/// C x C counts indexed (true class, predicted class).
class ConfusionMatrix {
   public:
    explicit ConfusionMatrix(std::size_t n_classes);
    ConfusionMatrix(std::size_t n_classes, std::vector<std::uint64_t> counts);
    /// Binary matrix with class 1 as the positive class: [[TN, FP], [FN, TP]].
    static ConfusionMatrix from_binary(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn, std::uint64_t fp);

    std::size_t n_classes() const { return n_; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
    void add(std::size_t truth, std::size_t predicted);
    std::uint64_t total() const;
    std::uint64_t trace() const;

    bool operator==(const ConfusionMatrix&) const = default;

   private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t n_classes);

/// One-vs-rest counts for `positive`.
struct BinaryCounts {
    std::uint64_t tp, fn, fp, tn;
};
BinaryCounts binary_counts(const ConfusionMatrix& cm, std::size_t positive);

enum class Convention { Standard, PaperLiteral };

// Ratios with a zero denominator evaluate to 0; when `warnings` is given a note is appended.
using Warnings = std::vector<std::string>;

double accuracy(const ConfusionMatrix& cm, Warnings* warnings = nullptr);
double sensitivity(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings = nullptr);
double specificity(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings = nullptr);
double precision(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings = nullptr);
double f1(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings = nullptr);
double false_positive_rate(const ConfusionMatrix& cm, std::size_t positive, Warnings* warnings = nullptr);

/// Standard: (TPR + TNR) / 2. PaperLiteral: (TP/(TP+FP) + TN/(TN+FN)) / 2. Binary matrices only.
double balanced_accuracy(const ConfusionMatrix& cm, std::size_t positive, Convention convention = Convention::Standard,
                         Warnings* warnings = nullptr);

/// Standard: (1+b^2) P R / (b^2 P + R). PaperLiteral: (1+b^2) P R / (b^2 (P + R)), which is not bounded by 1.
double fbeta(const ConfusionMatrix& cm, std::size_t positive, double beta, Convention convention = Convention::Standard,
             Warnings* warnings = nullptr);

struct RocPoint {
    double threshold;  // +inf for the (0, 0) origin
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc;
};

/// Threshold sweep over distinct scores (descending); tied scores form one step.
/// labels are 1 for positive, 0 for negative. Needs both classes present.
RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct ClassMetrics {
    std::string name;
    std::uint64_t support = 0;
    double accuracy = 0;  // one-vs-rest (TP + TN) / total
    double sensitivity = 0;
    double specificity = 0;
    double precision = 0;
    double f1 = 0;
    double false_positive_rate = 0;
    double balanced_accuracy = 0;
    double fbeta = 0;
    double auc = 0;  // NaN when no scores were supplied
};

struct ReportOptions {
    std::vector<std::string> class_names;  // defaults to "0", "1", ...
    std::optional<std::size_t> positive;   // binary headline orientation
    double beta = 1.0;
};

struct MetricsReport {
    std::vector<std::string> class_names;
    ConfusionMatrix confusion{2};
    double accuracy = 0;           // plain top-1
    double balanced_accuracy = 0;  // mean per-class recall
    std::vector<ClassMetrics> per_class;  // every class scored one-vs-rest
    ClassMetrics macro;                   // unweighted means of per_class
    std::optional<std::size_t> positive;
    double beta = 1.0;
    double paper_balanced_accuracy = 0;  // PaperLiteral convention, binary only
    double paper_fbeta = 0;
    std::vector<RocCurve> roc;  // per class, one-vs-rest; empty without scores
    Warnings warnings;

    /// Per-class metrics for the headline positive class (binary reports).
    const ClassMetrics& headline() const;
};

/// Scores each class one-vs-rest. y_true/probas may be empty, in which case AUC and ROC are omitted;
/// otherwise they must agree with the matrix (probas rows sum to the class count).
MetricsReport per_class_report(const ConfusionMatrix& cm, std::span<const std::size_t> y_true,
                               const std::vector<std::vector<double>>& probas, const ReportOptions& options = {});

/// Builds the confusion matrix from argmax predictions and reports it.
MetricsReport evaluate_predictions(std::span<const std::size_t> y_true, const std::vector<std::vector<double>>& probas,
                                   const ReportOptions& options = {});

enum class Rounding { Truncate, HalfUp };

/// value in [0, 1] to a one-decimal percentage, e.g. 0.97863 -> 97.8 (Truncate) or 97.9 (HalfUp).
double to_percent(double value, Rounding rounding = Rounding::Truncate);
std::string format_percent(double value, Rounding rounding = Rounding::Truncate);

std::string report_json(const MetricsReport& report);
/// Table rows: scope,class,acc,sns,spc,prc,f1,bal_acc,fbeta,fpr,auc,support with one-decimal percentages.
std::string report_csv(const MetricsReport& report, Rounding rounding = Rounding::Truncate);
std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);
std::string roc_csv(const RocCurve& curve);

}  // namespace quanvnet::metrics
