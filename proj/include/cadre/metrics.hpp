#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cadre/data.hpp"
#include "cadre/network.hpp"

// Detection metrics and reports: confusion counts, precision / detection
// rate / F-measure / accuracy, ROC with trapezoidal AUC, and per-scenario
// grouping with the unweighted arithmetic average across scenarios.
// "Positive" is always the drowsiness class (label 1).

namespace cadre {

struct Confusion {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    long long total() const { return tp + fp + fn + tn; }
};

inline Confusion confusion(const std::vector<int>& preds, const std::vector<int>& truths) {
    if (preds.size() != truths.size())
        throw std::invalid_argument("confusion: " + std::to_string(preds.size()) +
                                    " predictions vs " + std::to_string(truths.size()) +
                                    " truths");
    Confusion c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] != 0 && preds[i] != 1)
            throw std::invalid_argument("confusion: prediction not binary");
        if (truths[i] != 0 && truths[i] != 1)
            throw std::invalid_argument("confusion: truth not binary");
        if (truths[i] == 1)
            (preds[i] == 1 ? c.tp : c.fn)++;
        else
            (preds[i] == 1 ? c.fp : c.tn)++;
    }
    return c;
}

/// Rates derived from a confusion table. A zero denominator yields 0 with
/// the matching degenerate flag set, so callers can tell "earned 0" from
/// "undefined".
struct BinaryMetrics {
    double precision = 0.0;
    double detection_rate = 0.0;  // recall over the drowsiness class
    double f_measure = 0.0;       // harmonic mean of the two above
    double accuracy = 0.0;
    bool precision_degenerate = false;
    bool detection_rate_degenerate = false;
    bool f_degenerate = false;
    bool accuracy_degenerate = false;
};

inline BinaryMetrics metrics(const Confusion& c) {
    BinaryMetrics m;
    if (c.tp + c.fp > 0)
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    else
        m.precision_degenerate = true;
    if (c.tp + c.fn > 0)
        m.detection_rate = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    else
        m.detection_rate_degenerate = true;
    if (m.precision + m.detection_rate > 0.0)
        m.f_measure =
            2.0 * m.precision * m.detection_rate / (m.precision + m.detection_rate);
    else
        m.f_degenerate = true;
    if (c.total() > 0)
        m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    else
        m.accuracy_degenerate = true;
    return m;
}

struct RocPoint {
    double threshold = 0.0;  // classify positive when score >= threshold
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Threshold sweep over the unique scores (ties share one threshold),
/// descending, starting from the "admit nothing" anchor; AUC by trapezoids
/// over the resulting curve. Needs both classes present.
inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& truths) {
    if (scores.size() != truths.size())
        throw std::invalid_argument("roc_auc: " + std::to_string(scores.size()) +
                                    " scores vs " + std::to_string(truths.size()) + " truths");
    if (scores.empty()) throw std::invalid_argument("roc_auc: no items");
    long long n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
            throw std::invalid_argument("roc_auc: score outside [0,1]");
        if (truths[i] != 0 && truths[i] != 1)
            throw std::invalid_argument("roc_auc: truth not binary");
        (truths[i] == 1 ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_auc: need both classes, got " + std::to_string(n_pos) +
                                    " positive / " + std::to_string(n_neg) + " negative");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;  // stable, fully determined order
    });

    RocResult r;
    r.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (truths[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        r.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    for (std::size_t k = 1; k < r.points.size(); ++k)
        r.auc += (r.points[k].fpr - r.points[k - 1].fpr) *
                 (r.points[k].tpr + r.points[k - 1].tpr) / 2.0;
    return r;
}

// ---------------------------------------------------------------------------
// Dataset-level evaluation

struct ScenarioReport {
    int scenario = 0;
    std::size_t clip_count = 0;
    Confusion detection_confusion;
    BinaryMetrics detection;
    // Condition-head validation accuracies within this scenario.
    double glasses_acc = 0.0, head_acc = 0.0, mouth_acc = 0.0, eye_acc = 0.0;
};

struct MetricsReport {
    std::size_t total_clips = 0;
    std::vector<ScenarioReport> scenarios;  // present scenarios, ascending id
    std::vector<int> empty_scenarios;       // ids that had no clips (skipped)

    // Pooled over every clip regardless of scenario.
    Confusion overall_confusion;
    BinaryMetrics overall;
    double overall_glasses_acc = 0.0, overall_head_acc = 0.0, overall_mouth_acc = 0.0,
           overall_eye_acc = 0.0;

    // Unweighted arithmetic means over the present scenarios.
    double avg_precision = 0.0, avg_detection_rate = 0.0, avg_f_measure = 0.0,
           avg_accuracy = 0.0;
    double avg_glasses_acc = 0.0, avg_head_acc = 0.0, avg_mouth_acc = 0.0, avg_eye_acc = 0.0;

    RocResult roc;            // pooled; meaningful only when auc_defined
    bool auc_defined = false; // false when the dataset holds a single class
};

/// Runs inference over the dataset and assembles the full report. The
/// drowsiness score feeding the ROC is the detector's probability for the
/// drowsiness unit.
inline MetricsReport evaluate(const Network& net, const Dataset& data) {
    check_dataset(data);
    if (data.clips.empty()) throw std::invalid_argument("evaluate: dataset is empty");

    struct PerClip {
        Prediction pred;
        ClipLabels truth;
    };
    std::vector<PerClip> results;
    results.reserve(data.clips.size());
    for (const LabeledClip& c : data.clips)
        results.push_back({predict_clip(net, c.clip), c.labels});

    MetricsReport report;
    report.total_clips = results.size();

    auto fill_group = [&](const std::vector<const PerClip*>& group, Confusion& conf,
                          BinaryMetrics& det, double& gl, double& hd, double& mo, double& ey) {
        std::vector<int> preds, truths;
        preds.reserve(group.size());
        truths.reserve(group.size());
        long long gl_ok = 0, hd_ok = 0, mo_ok = 0, ey_ok = 0;
        for (const PerClip* r : group) {
            preds.push_back(r->pred.drowsy);
            truths.push_back(r->truth.drowsy);
            gl_ok += r->pred.glasses == r->truth.glasses;
            hd_ok += r->pred.head == r->truth.head;
            mo_ok += r->pred.mouth == r->truth.mouth;
            ey_ok += r->pred.eye == r->truth.eye;
        }
        conf = confusion(preds, truths);
        det = metrics(conf);
        const double n = static_cast<double>(group.size());
        gl = gl_ok / n;
        hd = hd_ok / n;
        mo = mo_ok / n;
        ey = ey_ok / n;
    };

    std::vector<const PerClip*> all;
    for (const PerClip& r : results) all.push_back(&r);
    fill_group(all, report.overall_confusion, report.overall, report.overall_glasses_acc,
               report.overall_head_acc, report.overall_mouth_acc, report.overall_eye_acc);

    for (int scenario = 0; scenario < kNumGlassesClasses; ++scenario) {
        std::vector<const PerClip*> group;
        for (const PerClip& r : results)
            if (r.truth.scenario == scenario) group.push_back(&r);
        if (group.empty()) {
            report.empty_scenarios.push_back(scenario);
            continue;
        }
        ScenarioReport sr;
        sr.scenario = scenario;
        sr.clip_count = group.size();
        fill_group(group, sr.detection_confusion, sr.detection, sr.glasses_acc, sr.head_acc,
                   sr.mouth_acc, sr.eye_acc);
        report.scenarios.push_back(sr);
    }

    const double groups = static_cast<double>(report.scenarios.size());
    for (const ScenarioReport& sr : report.scenarios) {
        report.avg_precision += sr.detection.precision / groups;
        report.avg_detection_rate += sr.detection.detection_rate / groups;
        report.avg_f_measure += sr.detection.f_measure / groups;
        report.avg_accuracy += sr.detection.accuracy / groups;
        report.avg_glasses_acc += sr.glasses_acc / groups;
        report.avg_head_acc += sr.head_acc / groups;
        report.avg_mouth_acc += sr.mouth_acc / groups;
        report.avg_eye_acc += sr.eye_acc / groups;
    }

    bool has_pos = false, has_neg = false;
    for (const PerClip& r : results) (r.truth.drowsy == 1 ? has_pos : has_neg) = true;
    if (has_pos && has_neg) {
        std::vector<double> scores;
        std::vector<int> truths;
        for (const PerClip& r : results) {
            scores.push_back(r.pred.drowsy_prob);
            truths.push_back(r.truth.drowsy);
        }
        report.roc = roc_auc(scores, truths);
        report.auc_defined = true;
    }
    return report;
}

}  // namespace cadre
