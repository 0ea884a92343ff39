#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wildfire/error.hpp"

namespace wildfire::metrics {

// 2x2 confusion counts for binary labels; label 1 is the positive class.
struct ConfusionMatrix {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;

    long long total() const { return tp + fp + tn + fn; }
};

// Counts agreement between truth and predicted (both 0/1, equal length).
ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted);

// Derived rates; a field is left empty when its denominator is zero rather
// than inventing a value.
struct Rates {
    std::optional<double> tpr;
    std::optional<double> tnr;
    std::optional<double> fpr;
    std::optional<double> fnr;
    std::optional<double> accuracy;
    std::optional<double> balanced_accuracy;  // (TPR + TNR) / 2
    std::optional<double> precision;
    std::optional<double> f1;  // harmonic mean of precision and TPR
};

Rates rates(const ConfusionMatrix& m);

// Precision recovered from rates alone, given the positive prevalence
// n = P / (P + N):  TPR*n / (TPR*n + FPR*(1-n)).  Empty when the
// denominator is zero.
std::optional<double> precision_from_rates(double tpr, double fpr,
                                           double prevalence);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // FPR ascending, from (0,0) to (1,1)
    double auc = 0.0;
};

// Sweeps the distinct scores as thresholds, descending; a sample counts as
// predicted-positive when score >= threshold.  A synthetic (0,0) point with
// threshold +inf anchors the curve, and the area follows by the trapezoid
// rule.  Requires at least one sample of each class.
RocCurve roc(const std::vector<int>& truth, const std::vector<double>& scores);

void write_confusion_csv(const std::string& path, const ConfusionMatrix& m);
void write_roc_csv(const std::string& path, const RocCurve& c);
void write_roc_svg(const std::string& path, const RocCurve& c);

}  // namespace wildfire::metrics
