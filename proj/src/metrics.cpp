#include "cue/metrics.hpp"

#include "cue/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace cue {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels, const char* what) {
    if (scores.size() != labels.size()) throw InvalidInput(std::string(what) + ": scores and labels differ in length");
    for (int y : labels)
        if (y != 0 && y != 1) throw InvalidInput(std::string(what) + ": labels must be 0 or 1");
    for (double s : scores)
        if (std::isnan(s)) throw InvalidInput(std::string(what) + ": NaN score");
}

void require_both_classes(std::span<const int> labels) {
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size()))
        throw MetricUndefined("AUROC undefined on one class");
}

io::Json tau_to_json(double tau) {
    if (std::isinf(tau)) return tau > 0 ? "inf" : "-inf";
    return tau;
}

double tau_from_json(const io::Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw InvalidInput("eval report: tau must be a number, \"inf\" or \"-inf\"");
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels, "auroc");
    require_both_classes(labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the positives' mid-rank sum; integral even with ties.
    std::int64_t twice_rank_sum = 0;
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const auto twice_mid_rank = static_cast<std::int64_t>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                twice_rank_sum += twice_mid_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
    const std::int64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

F1Result f1_score(std::span<const double> scores, std::span<const int> labels, double tau) {
    check_lengths(scores, labels, "f1");
    if (std::isnan(tau)) throw InvalidInput("f1: tau must not be NaN");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] > tau;
        if (predicted && labels[i] == 1) ++tp;
        else if (predicted) ++fp;
        else if (labels[i] == 1) ++fn;
    }
    F1Result r;
    if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

double select_threshold(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels, "select_threshold");
    require_both_classes(labels);
    std::vector<double> distinct(scores.begin(), scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back(distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0);
    candidates.push_back(std::numeric_limits<double>::infinity());

    double best_tau = candidates.front();
    double best_f1 = -1.0;
    for (double tau : candidates) {
        const double f = f1_score(scores, labels, tau).f1;
        if (f > best_f1) {
            best_f1 = f;
            best_tau = tau;
        }
    }
    return best_tau;
}

EceResult ece(std::span<const double> uncertainty, std::span<const int> labels, std::size_t n_bins) {
    check_lengths(uncertainty, labels, "ece");
    if (n_bins == 0) throw InvalidInput("ece: need at least one bin");
    const double m = static_cast<double>(n_bins);
    EceResult result;
    result.bins.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        result.bins[b].lo = static_cast<double>(b) / m;
        result.bins[b].hi = static_cast<double>(b + 1) / m;
    }
    std::vector<double> conf_sum(n_bins, 0.0);
    std::vector<std::size_t> reliable(n_bins, 0);
    for (std::size_t i = 0; i < uncertainty.size(); ++i) {
        const double u = uncertainty[i];
        if (!(u >= 0.0 && u <= 1.0))
            throw InvalidInput("ece: uncertainty scores must lie in [0, 1]; normalize first");
        const double c = 1.0 - u;
        auto b = static_cast<std::size_t>(std::clamp(std::ceil(c * m) - 1.0, 0.0, m - 1.0));
        // Settle floating-point edge cases against the stored bin edges.
        while (b > 0 && c <= result.bins[b].lo) --b;
        while (b + 1 < n_bins && c > result.bins[b].hi) ++b;
        ++result.bins[b].count;
        conf_sum[b] += c;
        if (labels[i] == 0) ++reliable[b];
    }
    const double n = static_cast<double>(uncertainty.size());
    for (std::size_t b = 0; b < n_bins; ++b) {
        auto& bin = result.bins[b];
        if (bin.count == 0) continue;
        const double cnt = static_cast<double>(bin.count);
        bin.confidence = conf_sum[b] / cnt;
        bin.accuracy = static_cast<double>(reliable[b]) / cnt;
        result.value += cnt / n * std::abs(bin.accuracy - bin.confidence);
    }
    return result;
}

double decision_risk(std::span<const double> scores, std::span<const int> labels, const DecisionCosts& costs) {
    check_lengths(scores, labels, "decision_risk");
    if (costs.lambda_01 < 0.0 || costs.lambda_10 < 0.0) throw InvalidInput("decision costs must be >= 0");
    if (scores.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool flagged = scores[i] > costs.tau;
        if (labels[i] == 0 && flagged) total += costs.lambda_01;
        if (labels[i] == 1 && !flagged) total += costs.lambda_10;
    }
    return total / static_cast<double>(scores.size());
}

AlignedData align(const ScoreSet& scores, const Labels& labels, std::span<const std::string> ids) {
    AlignedData out;
    out.ids.assign(ids.begin(), ids.end());
    out.scores.reserve(ids.size());
    out.labels.reserve(ids.size());
    for (const auto& id : ids) {
        auto s = scores.scores.find(id);
        if (s == scores.scores.end()) throw InvalidInput("no " + std::string(method_name(scores.method)) +
                                                         " score for id " + id);
        auto l = labels.find(id);
        if (l == labels.end()) throw InvalidInput("no label (judgment) for id " + id);
        out.scores.push_back(s->second);
        out.labels.push_back(l->second);
    }
    return out;
}

EvalReport evaluate(const ScoreSet& scores, const Labels& labels, const DatasetSplit& split,
                    const EvalConfig& config) {
    const auto test = align(scores, labels, split.test_ids);
    EvalReport r;
    r.method = std::string(method_name(scores.method));
    r.n_dev = split.dev_ids.size();
    r.n_test = split.test_ids.size();
    if (config.tau) {
        r.tau = *config.tau;
    } else {
        const auto dev = align(scores, labels, split.dev_ids);
        r.tau = select_threshold(dev.scores, dev.labels);
    }
    r.auroc = auroc(test.scores, test.labels);
    r.f1 = f1_score(test.scores, test.labels, r.tau);
    r.ece = ece(test.scores, test.labels, config.bins);
    r.risk_costs = DecisionCosts{config.lambda_01, config.lambda_10, r.tau};
    r.risk = decision_risk(test.scores, test.labels, r.risk_costs);
    return r;
}

EvalReport evaluate_with_baseline(const ScoreSet& vanilla, const ScoreSet& corrected, const Labels& labels,
                                  const DatasetSplit& split, const EvalConfig& config) {
    const auto base = evaluate(vanilla, labels, split, config);
    auto r = evaluate(corrected, labels, split, config);
    r.baseline_method = std::string(method_name(vanilla.method));
    auto delta = [](double v, double c) { return MetricDelta{v, c, c - v}; };
    r.deltas = EvalDeltas{delta(base.auroc, r.auroc), delta(base.f1.f1, r.f1.f1), delta(base.ece.value, r.ece.value),
                          delta(base.risk, r.risk)};
    return r;
}

io::Json report_to_json(const EvalReport& r) {
    io::Json j;
    j["method"] = r.method;
    j["n_dev"] = r.n_dev;
    j["n_test"] = r.n_test;
    j["auroc"] = r.auroc;
    j["f1"] = {{"precision", r.f1.precision}, {"recall", r.f1.recall}, {"f1", r.f1.f1}, {"tau", tau_to_json(r.tau)}};
    io::Json bins = io::Json::array();
    for (const auto& b : r.ece.bins)
        bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"conf", b.confidence}, {"acc", b.accuracy}});
    j["ece"] = {{"value", r.ece.value}, {"bins", std::move(bins)}};
    j["risk"] = {{"tau", tau_to_json(r.risk_costs.tau)},
                 {"lambda_01", r.risk_costs.lambda_01},
                 {"lambda_10", r.risk_costs.lambda_10},
                 {"value", r.risk}};
    if (r.deltas) {
        j["baseline_method"] = r.baseline_method.value_or("");
        auto d = [](const MetricDelta& m) {
            return io::Json{{"vanilla", m.vanilla}, {"corrected", m.corrected}, {"improvement", m.improvement}};
        };
        j["deltas"] = {{"auroc", d(r.deltas->auroc)},
                       {"f1", d(r.deltas->f1)},
                       {"ece", d(r.deltas->ece)},
                       {"risk", d(r.deltas->risk)}};
    }
    return j;
}

EvalReport report_from_json(const io::Json& j) {
    auto unit = [](double x, const char* what) {
        if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput(std::string("eval report: ") + what + " outside [0, 1]");
        return x;
    };
    try {
        EvalReport r;
        r.method = j.at("method").get<std::string>();
        parse_method(r.method);
        r.n_dev = j.at("n_dev").get<std::size_t>();
        r.n_test = j.at("n_test").get<std::size_t>();
        r.auroc = unit(j.at("auroc").get<double>(), "auroc");
        const auto& f = j.at("f1");
        r.f1.precision = unit(f.at("precision").get<double>(), "precision");
        r.f1.recall = unit(f.at("recall").get<double>(), "recall");
        r.f1.f1 = unit(f.at("f1").get<double>(), "f1");
        r.tau = tau_from_json(f.at("tau"));
        const auto& e = j.at("ece");
        r.ece.value = unit(e.at("value").get<double>(), "ece");
        std::size_t total = 0;
        for (const auto& b : e.at("bins")) {
            CalibrationBin bin{b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("count").get<std::size_t>(),
                               unit(b.at("conf").get<double>(), "bin confidence"),
                               unit(b.at("acc").get<double>(), "bin accuracy")};
            if (!(bin.lo < bin.hi)) throw InvalidInput("eval report: bin with lo >= hi");
            if (!r.ece.bins.empty() && r.ece.bins.back().hi != bin.lo)
                throw InvalidInput("eval report: calibration bins must be contiguous");
            total += bin.count;
            r.ece.bins.push_back(bin);
        }
        if (r.ece.bins.empty() || r.ece.bins.front().lo != 0.0 || r.ece.bins.back().hi != 1.0)
            throw InvalidInput("eval report: calibration bins must cover [0, 1]");
        if (total != r.n_test) throw InvalidInput("eval report: bin counts do not sum to n_test");
        const auto& k = j.at("risk");
        r.risk_costs = DecisionCosts{k.at("lambda_01").get<double>(), k.at("lambda_10").get<double>(),
                                     tau_from_json(k.at("tau"))};
        r.risk = k.at("value").get<double>();
        if (r.risk < 0.0 || r.risk_costs.lambda_01 < 0.0 || r.risk_costs.lambda_10 < 0.0)
            throw InvalidInput("eval report: negative risk or cost");
        if (auto d = j.find("deltas"); d != j.end() && !d->is_null()) {
            auto md = [](const io::Json& x) {
                return MetricDelta{x.at("vanilla").get<double>(), x.at("corrected").get<double>(),
                                   x.at("improvement").get<double>()};
            };
            r.baseline_method = j.at("baseline_method").get<std::string>();
            parse_method(*r.baseline_method);
            r.deltas = EvalDeltas{md(d->at("auroc")), md(d->at("f1")), md(d->at("ece")), md(d->at("risk"))};
        }
        return r;
    } catch (const io::Json::exception& e) {
        throw InvalidInput(std::string("eval report: malformed: ") + e.what());
    }
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string calibration_csv(const EceResult& result) {
    std::string out = "bin_lo,bin_hi,count,confidence,accuracy\n";
    for (const auto& b : result.bins)
        out += shortest(b.lo) + ',' + shortest(b.hi) + ',' + std::to_string(b.count) + ',' + shortest(b.confidence) +
               ',' + shortest(b.accuracy) + '\n';
    return out;
}

}  // namespace cue
