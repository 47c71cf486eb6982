#pragma once

#include "cue/io.hpp"
#include "cue/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cue {

// Label convention throughout: 1 = unreliable (positive class), 0 = reliable.
// A sample is predicted unreliable when its score is strictly above tau.

/// Probability that a random unreliable sample outscores a random reliable
/// one, ties counting one half. Mid-rank statistic, O(n log n).
/// Throws MetricUndefined when only one class is present.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct F1Result {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Undefined precision or recall counts as 0; F1 is 0 when P + R = 0.
F1Result f1_score(std::span<const double> scores, std::span<const int> labels, double tau);

/// Dev-set F1-maximizing threshold among -inf, midpoints of adjacent distinct
/// scores, and +inf. Ties go to the smallest threshold.
double select_threshold(std::span<const double> scores, std::span<const int> labels);

struct CalibrationBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double confidence = 0.0;  // mean of 1 - uncertainty (0 when empty)
    double accuracy = 0.0;    // fraction reliable (0 when empty)
};

struct EceResult {
    double value = 0.0;
    std::vector<CalibrationBin> bins;
};

/// Expected calibration error with confidence = 1 - uncertainty and accuracy =
/// fraction of label 0. `n_bins` equal-width bins: the first is [0, 1/M], the
/// rest (lo, hi]. Uncertainties must already lie in [0, 1].
EceResult ece(std::span<const double> uncertainty, std::span<const int> labels, std::size_t n_bins = 10);

struct DecisionCosts {
    double lambda_01 = 1.0;  // reliable sample flagged unreliable
    double lambda_10 = 1.0;  // unreliable sample passed as reliable
    double tau = 0.5;
};

/// Mean cost incurred by the rule "unreliable iff score > tau".
double decision_risk(std::span<const double> scores, std::span<const int> labels, const DecisionCosts& costs);

/// Scores and labels lined up over `ids`, in order.
struct AlignedData {
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::vector<int> labels;
};

AlignedData align(const ScoreSet& scores, const Labels& labels, std::span<const std::string> ids);

struct EvalConfig {
    std::size_t bins = 10;
    std::optional<double> tau;  // nullopt: select on dev
    double lambda_01 = 1.0;
    double lambda_10 = 1.0;
};

struct MetricDelta {
    double vanilla = 0.0;
    double corrected = 0.0;
    double improvement = 0.0;  // corrected - vanilla
};

struct EvalDeltas {
    MetricDelta auroc;
    MetricDelta f1;
    MetricDelta ece;
    MetricDelta risk;
};

struct EvalReport {
    std::string method;
    std::size_t n_dev = 0;
    std::size_t n_test = 0;
    double auroc = 0.0;
    F1Result f1;
    double tau = 0.0;
    EceResult ece;
    DecisionCosts risk_costs;
    double risk = 0.0;
    std::optional<std::string> baseline_method;  // set together with deltas
    std::optional<EvalDeltas> deltas;
};

/// Test-split AUROC / F1 / ECE / risk, with the threshold picked on dev
/// unless fixed in `config`.
EvalReport evaluate(const ScoreSet& scores, const Labels& labels, const DatasetSplit& split,
                    const EvalConfig& config);

/// Evaluates `corrected` and attaches vanilla / corrected / improvement deltas
/// against `vanilla` (each threshold picked on dev for its own scores).
EvalReport evaluate_with_baseline(const ScoreSet& vanilla, const ScoreSet& corrected, const Labels& labels,
                                  const DatasetSplit& split, const EvalConfig& config);

io::Json report_to_json(const EvalReport& report);
/// Parses and checks an eval_report.json document; throws InvalidInput.
EvalReport report_from_json(const io::Json& j);

/// bin_lo,bin_hi,count,confidence,accuracy
std::string calibration_csv(const EceResult& result);

}  // namespace cue
