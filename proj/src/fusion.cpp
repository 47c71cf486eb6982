#include "cue/fusion.hpp"

#include "cue/error.hpp"
#include "cue/metrics.hpp"
#include "cue/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace cue {

NormalizedScores min_max_normalize(const ScoreSet& raw) {
    if (raw.scores.empty()) throw InvalidInput("cannot normalize an empty score set");
    for (const auto& [id, s] : raw.scores)
        if (!std::isfinite(s)) throw InvalidInput("non-finite score for id " + id);
    const auto [lo_it, hi_it] = std::minmax_element(raw.scores.begin(), raw.scores.end(),
                                                    [](const auto& a, const auto& b) { return a.second < b.second; });
    NormalizedScores out;
    out.min = lo_it->second;
    out.max = hi_it->second;
    out.scores.method = raw.method;
    out.scores.normalized = true;
    const double range = out.max - out.min;
    for (const auto& [id, s] : raw.scores)
        out.scores.scores[id] = range > 0.0 ? std::clamp((s - out.min) / range, 0.0, 1.0) : 0.5;
    return out;
}

ScoreSet restrict_to(const ScoreSet& set, std::span<const std::string> ids) {
    ScoreSet out;
    out.method = set.method;
    out.normalized = set.normalized;
    for (const auto& id : ids) {
        auto it = set.scores.find(id);
        if (it == set.scores.end())
            throw InvalidInput("no " + std::string(method_name(set.method)) + " score for id " + id);
        out.scores.emplace(id, it->second);
    }
    return out;
}

ScoreSet fuse(const ScoreSet& normalized, const ScoreSet& corrector, double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidInput("fusion weight must lie in [0, 1]");
    std::vector<std::string> only_left, only_right;
    for (const auto& [id, _] : normalized.scores)
        if (!corrector.scores.contains(id)) only_left.push_back(id);
    for (const auto& [id, _] : corrector.scores)
        if (!normalized.scores.contains(id)) only_right.push_back(id);
    if (!only_left.empty() || !only_right.empty()) {
        std::string msg = "fusion id mismatch;";
        auto list = [&msg](const char* label, const std::vector<std::string>& ids) {
            if (ids.empty()) return;
            msg += std::string(" ") + label + ":";
            for (const auto& id : ids) msg += " " + id;
        };
        list("only in uncertainty scores", only_left);
        list("only in corrector scores", only_right);
        throw InvalidInput(msg);
    }
    ScoreSet out;
    out.method = Method::fused;
    out.normalized = true;
    for (const auto& [id, u] : normalized.scores) {
        const double c = corrector.scores.at(id);
        if (!(u >= 0.0 && u <= 1.0 && c >= 0.0 && c <= 1.0))
            throw InvalidInput("fusion inputs must lie in [0, 1] (id " + id + ")");
        if (w == 1.0) out.scores[id] = u;
        else if (w == 0.0) out.scores[id] = c;
        else out.scores[id] = w * u + (1.0 - w) * c;
    }
    return out;
}

void validate(const FusionConfig& config) {
    if (config.w && !(*config.w >= 0.0 && *config.w <= 1.0)) throw InvalidInput("w must lie in [0, 1]");
    if (!config.w && !(config.grid_step > 0.0 && config.grid_step <= 0.5))
        throw InvalidInput("grid_step must lie in (0, 0.5]");
    if (!(config.stable_tolerance >= 0.0)) throw InvalidInput("stable tolerance must be >= 0");
}

std::vector<double> weight_grid(double step) {
    if (!(step > 0.0 && step <= 0.5)) throw InvalidInput("grid_step must lie in (0, 0.5]");
    std::vector<double> grid;
    const double k_real = 1.0 / step;
    const double k_round = std::round(k_real);
    if (std::abs(k_real - k_round) < 1e-9 * k_round) {
        const auto k = static_cast<long>(k_round);
        for (long i = 0; i <= k; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(k));
        return grid;
    }
    for (long i = 0;; ++i) {
        const double w = static_cast<double>(i) * step;
        if (w >= 1.0) break;
        grid.push_back(w);
    }
    grid.push_back(1.0);
    return grid;
}

GridSearchResult grid_search_w(const ScoreSet& normalized, const ScoreSet& corrector, const Labels& dev_labels,
                               const FusionConfig& config) {
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& [id, y] : dev_labels) {
        ids.push_back(id);
        labels.push_back(y);
    }
    const auto u = restrict_to(normalized, ids);
    const auto c = restrict_to(corrector, ids);
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size()))
        throw MetricUndefined("AUROC undefined on one class");

    const auto grid = weight_grid(config.grid_step);
    GridSearchResult result;
    result.curve.resize(grid.size());
    parallel_for(grid.size(), config.jobs, [&](std::size_t k) {
        const auto fused = fuse(u, c, grid[k]);
        std::vector<double> scores;
        scores.reserve(ids.size());
        for (const auto& id : ids) scores.push_back(fused.scores.at(id));
        result.curve[k] = CurvePoint{grid[k], auroc(scores, labels)};
    });
    result.w_star = result.curve.front().w;
    result.objective = result.curve.front().auroc;
    for (const auto& p : result.curve) {
        if (p.auroc > result.objective) {
            result.objective = p.auroc;
            result.w_star = p.w;
        }
    }
    return result;
}

std::pair<double, double> stable_range(std::span<const CurvePoint> curve, double w_star, double tolerance) {
    if (curve.empty()) throw InvalidInput("stable_range needs a non-empty curve");
    std::size_t centre = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (std::abs(curve[i].w - w_star) < std::abs(curve[centre].w - w_star)) centre = i;
    if (std::abs(curve[centre].w - w_star) > 1e-12) throw InvalidInput("w_star is not on the curve's grid");
    const double floor = curve[centre].auroc - tolerance;
    std::size_t lo = centre;
    std::size_t hi = centre;
    while (lo > 0 && curve[lo - 1].auroc >= floor) --lo;
    while (hi + 1 < curve.size() && curve[hi + 1].auroc >= floor) ++hi;
    return {curve[lo].w, curve[hi].w};
}

FusionResult run_fusion(const ScoreSet& vanilla, const ScoreSet& corrector, const Labels& labels,
                        const DatasetSplit& split, const FusionConfig& config) {
    validate(config);
    std::vector<std::string> eval_ids = split.dev_ids;
    eval_ids.insert(eval_ids.end(), split.test_ids.begin(), split.test_ids.end());
    std::sort(eval_ids.begin(), eval_ids.end());

    const auto norm = min_max_normalize(restrict_to(vanilla, eval_ids));
    const auto corr = restrict_to(corrector, eval_ids);

    Labels dev_labels;
    for (const auto& id : split.dev_ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw InvalidInput("no label (judgment) for id " + id);
        dev_labels.emplace(id, it->second);
    }

    FusionResult r;
    r.source = vanilla.method;
    r.norm_min = norm.min;
    r.norm_max = norm.max;
    if (config.w) {
        r.w_star = *config.w;
        const auto fused_dev = fuse(restrict_to(norm.scores, split.dev_ids), restrict_to(corr, split.dev_ids), r.w_star);
        const auto dev = align(fused_dev, dev_labels, split.dev_ids);
        r.objective = auroc(dev.scores, dev.labels);
    } else {
        auto search = grid_search_w(norm.scores, corr, dev_labels, config);
        r.w_star = search.w_star;
        r.objective = search.objective;
        r.curve = std::move(search.curve);
        r.stable = stable_range(r.curve, r.w_star, config.stable_tolerance);
    }
    r.fused = fuse(norm.scores, corr, r.w_star);
    return r;
}

io::Json fusion_report_to_json(const FusionResult& r) {
    io::Json j;
    j["method"] = method_name(r.source);
    j["w_star"] = r.w_star;
    j["objective"] = r.objective;
    io::Json curve = io::Json::array();
    for (const auto& p : r.curve) curve.push_back(io::Json::array({p.w, p.auroc}));
    j["curve"] = std::move(curve);
    j["stable_range"] = r.stable ? io::Json::array({r.stable->first, r.stable->second}) : io::Json(nullptr);
    j["normalization"] = {{"min", r.norm_min}, {"max", r.norm_max}};
    return j;
}

}  // namespace cue
