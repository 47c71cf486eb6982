#pragma once

#include "cue/io.hpp"
#include "cue/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cue {

struct NormalizedScores {
    ScoreSet scores;  // normalized == true
    double min = 0.0;
    double max = 0.0;
};

/// (U - min) / (max - min); a constant input maps to 0.5 everywhere.
NormalizedScores min_max_normalize(const ScoreSet& raw);

/// Restricts a score set to `ids` (all must be present).
ScoreSet restrict_to(const ScoreSet& set, std::span<const std::string> ids);

/// w * normalized + (1 - w) * corrector, per id. Id sets must match.
ScoreSet fuse(const ScoreSet& normalized, const ScoreSet& corrector, double w);

struct FusionConfig {
    std::optional<double> w;  // nullopt: grid search on dev
    double grid_step = 0.001;
    double stable_tolerance = 0.01;  // absolute AUROC drop
    unsigned jobs = 1;
};

void validate(const FusionConfig& config);

struct CurvePoint {
    double w = 0.0;
    double auroc = 0.0;
};

struct GridSearchResult {
    double w_star = 0.0;
    double objective = 0.0;
    std::vector<CurvePoint> curve;  // ascending w, covering [0, 1]
};

/// 0, step, 2*step, ..., 1. When 1/step is an integer K the points are k/K
/// exactly; otherwise 1 is appended after the last multiple of step.
std::vector<double> weight_grid(double step);

/// Dev AUROC of the fused scores at every grid weight; the maximizer with the
/// smallest w wins ties. Throws MetricUndefined when dev has one class.
GridSearchResult grid_search_w(const ScoreSet& normalized, const ScoreSet& corrector, const Labels& dev_labels,
                               const FusionConfig& config);

/// Widest contiguous run of grid points around w_star whose AUROC stays at or
/// above AUROC(w_star) - tolerance.
std::pair<double, double> stable_range(std::span<const CurvePoint> curve, double w_star, double tolerance);

struct FusionResult {
    ScoreSet fused;
    double w_star = 0.0;
    double objective = 0.0;  // dev AUROC at w_star
    std::vector<CurvePoint> curve;
    std::optional<std::pair<double, double>> stable;
    double norm_min = 0.0;
    double norm_max = 0.0;
    Method source = Method::pe;
};

/// Normalizes `vanilla` over dev + test, picks w (grid search on dev labels
/// unless fixed) and fuses over dev + test.
FusionResult run_fusion(const ScoreSet& vanilla, const ScoreSet& corrector, const Labels& labels,
                        const DatasetSplit& split, const FusionConfig& config);

io::Json fusion_report_to_json(const FusionResult& result);

}  // namespace cue
