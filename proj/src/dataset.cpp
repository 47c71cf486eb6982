#include "cue/dataset.hpp"

#include "cue/error.hpp"
#include "cue/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cue {

std::size_t ValidationReport::count(std::string_view kind) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [&](const Violation& v) { return v.kind == kind; }));
}

bool method_available(const GenerationRecord& record, Method method) {
    switch (method) {
        case Method::pe:
        case Method::ln_pe:
        case Method::se:
        case Method::sar_t:
        case Method::sar_s:
        case Method::sar:
            return record.all_have_logprobs();
        case Method::ls:
            return record.generations.size() >= 2;
        case Method::vc:
            return record.verbal_confidence.has_value();
        case Method::ptrue:
            return record.p_true.has_value();
        case Method::corrector:
            return record.external_corrector_prob.has_value();
        case Method::fused:
            return false;
    }
    return false;
}

namespace {

void check_range(std::vector<Violation>& out, const std::string& id, const std::optional<double>& value,
                 double lo, double hi, const char* field) {
    if (!value) return;
    if (!(std::isfinite(*value) && *value >= lo && *value <= hi)) {
        out.push_back({id, std::string(field) + " out of range",
                       std::string(field) + " = " + std::to_string(*value) + " outside [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]"});
    }
}

void check_record(std::vector<Violation>& out, const GenerationRecord& r) {
    if (r.generations.empty()) {
        out.push_back({r.id, "no generations", "record has no generations"});
    } else if (r.primary_index >= r.generations.size()) {
        out.push_back({r.id, "primary index out of range",
                       "primary_index " + std::to_string(r.primary_index) + " >= " +
                           std::to_string(r.generations.size()) + " generations"});
    }
    for (std::size_t b = 0; b < r.generations.size(); ++b) {
        const auto& g = r.generations[b];
        if (!g.token_logprobs) continue;
        const auto& lps = *g.token_logprobs;
        const std::string where = "generation " + std::to_string(b);
        if (lps.size() != g.tokens.size()) {
            out.push_back({r.id, "length mismatch",
                           where + ": " + std::to_string(g.tokens.size()) + " tokens but " +
                               std::to_string(lps.size()) + " logprobs"});
        }
        for (double lp : lps) {
            if (!std::isfinite(lp)) {
                out.push_back({r.id, "non-finite logprob", where + ": non-finite token logprob"});
                break;
            }
            if (lp > 0.0) {
                out.push_back({r.id, "positive logprob", where + ": token logprob > 0"});
                break;
            }
        }
    }
    check_range(out, r.id, r.verbal_confidence, 0.0, 100.0, "verbal_confidence");
    check_range(out, r.id, r.p_true, 0.0, 1.0, "p_true");
    check_range(out, r.id, r.external_corrector_prob, 0.0, 1.0, "external_corrector_prob");
}

}  // namespace

ValidationReport validate_dataset(std::span<const Sample> samples, std::span<const GenerationRecord> records) {
    ValidationReport report;
    auto& out = report.violations;

    std::set<std::string> sample_ids;
    for (const auto& s : samples) {
        if (s.id.empty()) out.push_back({s.id, "empty id", "sample with empty id"});
        if (s.question.empty()) out.push_back({s.id, "empty question", "sample has an empty question"});
        if (!sample_ids.insert(s.id).second) out.push_back({s.id, "duplicate sample", "sample id appears twice"});
    }

    std::set<std::string> record_ids;
    for (const auto& r : records) {
        if (!record_ids.insert(r.id).second) out.push_back({r.id, "duplicate record", "record id appears twice"});
        if (!sample_ids.contains(r.id)) out.push_back({r.id, "orphan record", "record id not found in samples"});
        check_record(out, r);
    }
    for (const auto& id : sample_ids) {
        if (!record_ids.contains(id)) out.push_back({id, "missing record", "sample has no generation record"});
    }

    for (Method m : {Method::pe, Method::ln_pe, Method::se, Method::sar_t, Method::sar_s, Method::sar,
                     Method::ls, Method::vc, Method::ptrue, Method::corrector}) {
        report.usable_records[m] = static_cast<std::size_t>(std::count_if(
            records.begin(), records.end(), [m](const GenerationRecord& r) { return method_available(r, m); }));
    }
    return report;
}

DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed, double dev_fraction) {
    if (ids.size() < 2) throw InvalidInput("split needs at least 2 samples");
    if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) throw InvalidInput("dev_fraction must lie in (0, 1)");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw InvalidInput("split ids must be unique");

    std::mt19937_64 rng(seed);
    fisher_yates(std::span<std::string>(ids), rng);

    const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(ids.size())));
    DatasetSplit split;
    split.seed = seed;
    split.dev_fraction = dev_fraction;
    split.dev_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_dev));
    split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_dev), ids.end());
    std::sort(split.dev_ids.begin(), split.dev_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

}  // namespace cue
