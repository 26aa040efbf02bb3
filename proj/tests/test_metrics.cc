#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "quanvnet/errors.h"
#include "quanvnet/metrics.h"
#include "quanvnet/rng.h"

using namespace quanvnet;
using namespace quanvnet::metrics;

namespace {

std::vector<std::string> row(const ConfusionMatrix& cm, Rounding r = Rounding::Truncate) {
    return {format_percent(accuracy(cm), r), format_percent(sensitivity(cm, 1), r), format_percent(specificity(cm, 1), r),
            format_percent(precision(cm, 1), r), format_percent(f1(cm, 1), r)};
}

double mann_whitney(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1;
                wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return wins / pairs;
}

}  // namespace

TEST(Metrics, PublishedBinaryRowsReproduceWithTruncation) {
    using V = std::vector<std::string>;
    EXPECT_EQ(row(ConfusionMatrix::from_binary(150, 1, 229, 5)), (V{"98.4", "99.3", "97.8", "96.7", "98.0"}));
    EXPECT_EQ(row(ConfusionMatrix::from_binary(389, 1, 157, 4)), (V{"99.0", "99.7", "97.5", "98.9", "99.3"}));
    EXPECT_EQ(row(ConfusionMatrix::from_binary(150, 1, 226, 8)), (V{"97.6", "99.3", "96.5", "94.9", "97.0"}));
    // Half-up rounding would disagree with the printed values.
    EXPECT_EQ(row(ConfusionMatrix::from_binary(389, 1, 157, 4), Rounding::HalfUp)[3], "99.0");
    EXPECT_EQ(row(ConfusionMatrix::from_binary(150, 1, 226, 8), Rounding::HalfUp)[2], "96.6");
}

TEST(Metrics, FBetaAndBalancedAccuracyConventions) {
    const auto cm = ConfusionMatrix::from_binary(150, 1, 229, 5);
    EXPECT_NEAR(fbeta(cm, 1, 1.0), f1(cm, 1), 1e-15);
    EXPECT_NEAR(fbeta(cm, 1, 0.5), 0.972762645914397, 1e-12);
    EXPECT_NEAR(fbeta(cm, 1, 2.0), 0.9881422924901185, 1e-12);
    EXPECT_NEAR(fbeta(cm, 1, 0.5, Convention::PaperLiteral), 2.450980392156863, 1e-12);
    EXPECT_NEAR(balanced_accuracy(cm, 1), 0.9860049810380935, 1e-12);
    EXPECT_NEAR(balanced_accuracy(cm, 1, Convention::PaperLiteral), 0.9816970546984572, 1e-12);
    EXPECT_THROW(fbeta(cm, 1, 0.0), ConfigError);
    EXPECT_THROW(balanced_accuracy(ConfusionMatrix(3), 1), ConfigError);
}

TEST(Metrics, OneVsRestCountsOnThreeClasses) {
    // rows = truth, columns = prediction
    const ConfusionMatrix cm(3, {5, 1, 0, 2, 7, 1, 0, 3, 9});
    const BinaryCounts c = binary_counts(cm, 1);
    EXPECT_EQ(c.tp, 7u);
    EXPECT_EQ(c.fn, 3u);
    EXPECT_EQ(c.fp, 4u);
    EXPECT_EQ(c.tn, 14u);
    EXPECT_NEAR(accuracy(cm), 21.0 / 28.0, 1e-15);
    const MetricsReport r = per_class_report(cm, {}, {}, {{"normal", "covid19", "pneumonia"}, std::nullopt});
    EXPECT_NEAR(r.balanced_accuracy, (5.0 / 6 + 0.7 + 0.75) / 3, 1e-15);
    EXPECT_NEAR(r.per_class[2].precision, 0.9, 1e-15);
    EXPECT_EQ(r.per_class[0].support, 6u);
    EXPECT_TRUE(std::isnan(r.per_class[0].auc));
    EXPECT_THROW(binary_counts(cm, 3), ConfigError);
}

TEST(Metrics, ZeroDenominatorsWarnInsteadOfDividing) {
    const auto cm = ConfusionMatrix::from_binary(0, 5, 5, 0);  // positive class never predicted
    Warnings w;
    EXPECT_EQ(precision(cm, 1, &w), 0.0);
    EXPECT_EQ(w.size(), 1u);
    const MetricsReport r = per_class_report(cm, {}, {}, {{}, 1});
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_EQ(r.class_names, (std::vector<std::string>{"0", "1"}));
}

TEST(Metrics, RocAucEqualsMannWhitney) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_below(40);
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.uniform_below(6)) / 5.0;
            y[i] = static_cast<std::uint8_t>(rng.uniform_below(2));
        }
        y[0] = 0;
        y[1] = 1;
        const RocCurve roc = roc_auc(s, y);
        EXPECT_NEAR(roc.auc, mann_whitney(s, y), 1e-12);
        EXPECT_EQ(roc.points.front().fpr, 0.0);
        EXPECT_EQ(roc.points.back().tpr, 1.0);
        EXPECT_EQ(roc.points.back().fpr, 1.0);
        for (std::size_t i = 1; i < roc.points.size(); ++i) {
            EXPECT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
            EXPECT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
            EXPECT_LT(roc.points[i].threshold, roc.points[i - 1].threshold);
        }
    }
}

TEST(Metrics, RocEdgeCases) {
    const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    EXPECT_EQ(roc_auc(s, std::vector<std::uint8_t>{1, 1, 0, 0}).auc, 1.0);
    EXPECT_EQ(roc_auc(s, std::vector<std::uint8_t>{0, 0, 1, 1}).auc, 0.0);
    EXPECT_EQ(roc_auc(std::vector<double>(4, 0.5), std::vector<std::uint8_t>{0, 1, 0, 1}).auc, 0.5);
    EXPECT_THROW(roc_auc(s, std::vector<std::uint8_t>{1, 1, 1, 1}), InputError);
    EXPECT_THROW(roc_auc(s, std::vector<std::uint8_t>{1, 0}), InputError);
    EXPECT_THROW(roc_auc(std::vector<double>{NAN, 0.1}, std::vector<std::uint8_t>{1, 0}), InputError);
}

TEST(Metrics, PerfectPredictionsScoreOne) {
    const std::vector<std::size_t> y{0, 1, 1, 0};
    const std::vector<std::vector<double>> p{{0.9, 0.1}, {0.2, 0.8}, {0.4, 0.6}, {0.7, 0.3}};
    const MetricsReport r = evaluate_predictions(y, p, {{"normal", "covid19"}, 1});
    EXPECT_EQ(r.accuracy, 1.0);
    const ClassMetrics& h = r.headline();
    for (double v : {h.sensitivity, h.specificity, h.precision, h.f1, h.balanced_accuracy, h.auc}) EXPECT_EQ(v, 1.0);
    EXPECT_EQ(h.false_positive_rate, 0.0);
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_THROW(evaluate_predictions(y, {{1.0, 0.0}}, {}), InputError);
}

TEST(Metrics, PercentRounding) {
    EXPECT_EQ(to_percent(0.97863), 97.8);
    EXPECT_EQ(to_percent(0.97863, Rounding::HalfUp), 97.9);
    EXPECT_EQ(to_percent(0.98), 98.0);
    EXPECT_EQ(to_percent(0.07), 7.0);
    EXPECT_EQ(to_percent(0.9995, Rounding::HalfUp), 100.0);
    EXPECT_EQ(format_percent(1.0), "100.0");
    EXPECT_EQ(format_percent(NAN), "");
}

TEST(Metrics, Emitters) {
    const auto cm = ConfusionMatrix::from_binary(150, 1, 229, 5);
    const MetricsReport r = per_class_report(cm, {}, {}, {{"normal", "covid19"}, 1});
    const std::string csv = report_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scope,class,acc,sns,spc,prc,f1,bal_acc,fbeta,fpr,auc,support");
    EXPECT_NE(csv.find("binary,covid19,98.4,99.3,97.8,96.7,98.0,98.6,98.0,2.1,,151"), std::string::npos) << csv;
    EXPECT_EQ(confusion_csv(cm, r.class_names), "true\\predicted,normal,covid19\nnormal,229,5\ncovid19,1,150\n");
    const auto j = nlohmann::json::parse(report_json(r));
    EXPECT_EQ(j["confusion_matrix"][1][1], 150);
    EXPECT_EQ(j["positive_class"], "covid19");
    EXPECT_EQ(roc_csv(roc_auc(std::vector<double>{0.5, 0.2}, std::vector<std::uint8_t>{1, 0})),
              "threshold,fpr,tpr\ninf,0,0\n0.5,0,1\n0.20000000000000001,1,1\n");
}
