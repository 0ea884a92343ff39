#include "wildfire/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wildfire::metrics {
namespace {

void check_binary(const std::vector<int>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0 && v[i] != 1)
            throw DataError(std::string(what) + " value at index " +
                            std::to_string(i) + " is " + std::to_string(v[i]) +
                            ", expected 0 or 1");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    if (std::isinf(v)) {
        os << (v > 0 ? "inf" : "-inf");
    } else {
        os << std::setprecision(17) << v;
    }
    return os.str();
}

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
        throw DimensionError("confusion: " + std::to_string(truth.size()) +
                             " labels vs " + std::to_string(predicted.size()) +
                             " predictions");
    if (truth.empty()) throw DataError("confusion: empty input");
    check_binary(truth, "truth");
    check_binary(predicted, "prediction");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1) {
            (predicted[i] == 1 ? m.tp : m.fn)++;
        } else {
            (predicted[i] == 1 ? m.fp : m.tn)++;
        }
    }
    return m;
}

Rates rates(const ConfusionMatrix& m) {
    Rates r;
    const double p = static_cast<double>(m.tp + m.fn);
    const double n = static_cast<double>(m.tn + m.fp);
    if (p > 0) {
        r.tpr = m.tp / p;
        r.fnr = m.fn / p;
    }
    if (n > 0) {
        r.tnr = m.tn / n;
        r.fpr = m.fp / n;
    }
    if (m.total() > 0)
        r.accuracy = static_cast<double>(m.tp + m.tn) / m.total();
    if (r.tpr && r.tnr) r.balanced_accuracy = (*r.tpr + *r.tnr) / 2.0;
    if (m.tp + m.fp > 0)
        r.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
    if (r.precision && r.tpr && *r.precision + *r.tpr > 0)
        r.f1 = 2.0 * *r.precision * *r.tpr / (*r.precision + *r.tpr);
    return r;
}

std::optional<double> precision_from_rates(double tpr, double fpr,
                                           double prevalence) {
    const double denom = tpr * prevalence + fpr * (1.0 - prevalence);
    if (denom == 0.0) return std::nullopt;
    return tpr * prevalence / denom;
}

RocCurve roc(const std::vector<int>& truth, const std::vector<double>& scores) {
    if (truth.size() != scores.size())
        throw DimensionError("roc: " + std::to_string(truth.size()) +
                             " labels vs " + std::to_string(scores.size()) +
                             " scores");
    if (truth.empty()) throw DataError("roc: empty input");
    check_binary(truth, "truth");
    long long pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw DataError("roc: non-finite score at index " + std::to_string(i));
        pos += truth[i];
    }
    const long long neg = static_cast<long long>(truth.size()) - pos;
    if (pos == 0 || neg == 0)
        throw DataError("roc: needs at least one positive and one negative label");

    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    for (double t : thresholds) {
        long long tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) (truth[i] == 1 ? tp : fp)++;
        }
        curve.points.push_back({static_cast<double>(fp) / neg,
                                static_cast<double>(tp) / pos, t});
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return curve;
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& m) {
    std::ofstream out = open_out(path);
    out << ",predicted_0,predicted_1\n";
    out << "actual_0," << m.tn << "," << m.fp << "\n";
    out << "actual_1," << m.fn << "," << m.tp << "\n";
}

void write_roc_csv(const std::string& path, const RocCurve& c) {
    std::ofstream out = open_out(path);
    out << "threshold,fpr,tpr\n";
    for (const RocPoint& p : c.points)
        out << fmt(p.threshold) << "," << fmt(p.fpr) << "," << fmt(p.tpr) << "\n";
    out << "auc," << fmt(c.auc) << ",\n";
}

void write_roc_svg(const std::string& path, const RocCurve& c) {
    const double size = 420.0, margin = 40.0;
    const double span = size - 2 * margin;
    auto px = [&](double fpr) { return margin + fpr * span; };
    auto py = [&](double tpr) { return size - margin - tpr * span; };

    std::ofstream out = open_out(path);
    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
        << "\" height=\"" << size << "\" viewBox=\"0 0 " << size << " " << size
        << "\">\n";
    out << "  <rect width=\"" << size << "\" height=\"" << size
        << "\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
        << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0)
        << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
        << "\" y2=\"" << py(1) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4\"/>\n";
    out << "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (const RocPoint& p : c.points) out << px(p.fpr) << "," << py(p.tpr) << " ";
    out << "\"/>\n";
    out << "  <text x=\"" << size / 2 << "\" y=\"" << size - 10
        << "\" text-anchor=\"middle\" font-size=\"14\">false positive rate</text>\n";
    out << "  <text x=\"14\" y=\"" << size / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 14 "
        << size / 2 << ")\">true positive rate</text>\n";
    out << "  <text x=\"" << px(0.6) << "\" y=\"" << py(0.1)
        << "\" font-size=\"14\">AUC = " << std::setprecision(4) << c.auc
        << "</text>\n";
    out << "</svg>\n";
}

}  // namespace wildfire::metrics
