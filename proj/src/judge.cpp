#include "cue/judge.hpp"

#include "cue/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace cue {

std::vector<std::string> normalize_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::size_t lo = i;
        std::size_t hi = j;
        while (lo < hi && std::ispunct(static_cast<unsigned char>(text[lo]))) ++lo;
        while (hi > lo && std::ispunct(static_cast<unsigned char>(text[hi - 1]))) --hi;
        if (hi > lo) {
            std::string tok(text.substr(lo, hi - lo));
            for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            tokens.push_back(std::move(tok));
        }
        i = j;
    }
    return tokens;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.size() < b.size()) std::swap(a, b);
    // One row over the shorter sequence; short answers stay on the stack.
    constexpr std::size_t kStackRow = 64;
    std::array<std::size_t, kStackRow + 1> small{};
    std::vector<std::size_t> large;
    std::size_t* row = small.data();
    if (b.size() > kStackRow) {
        large.assign(b.size() + 1, 0);
        row = large.data();
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;  // row[j - 1] from the previous i
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

double rouge_l_tokens(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return 0.0;
    return static_cast<double>(lcs_length(a, b)) / static_cast<double>(std::min(a.size(), b.size()));
}

double rouge_l(std::string_view candidate, std::string_view reference) {
    const auto a = normalize_tokens(candidate);
    const auto b = normalize_tokens(reference);
    return rouge_l_tokens(a, b);
}

void validate(const JudgeConfig& config) {
    if (!(config.rouge_threshold > 0.0 && config.rouge_threshold <= 1.0))
        throw InvalidInput("rouge_threshold must lie in (0, 1]");
}

Judgment judge_sample(const Sample& sample, const GenerationRecord& record, const JudgeConfig& config) {
    if (record.primary_index >= record.generations.size())
        throw InvalidInput("primary_index out of range for record " + record.id);
    Judgment j;
    j.id = sample.id;
    j.rouge_l = rouge_l(record.primary().text, sample.reference_answer);
    j.rule_correct = j.rouge_l > config.rouge_threshold;
    if (config.use_llm_judge) j.llm_correct = record.llm_judge;
    j.correct = j.rule_correct || j.llm_correct.value_or(false);
    j.corrector_target = j.correct ? 0 : 1;
    return j;
}

namespace {

std::map<std::string_view, const GenerationRecord*> index_records(std::span<const GenerationRecord> records) {
    std::map<std::string_view, const GenerationRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.id, &r);
    return by_id;
}

}  // namespace

std::vector<Judgment> judge_dataset(std::span<const Sample> samples, std::span<const GenerationRecord> records,
                                    const JudgeConfig& config) {
    validate(config);
    const auto by_id = index_records(records);
    std::vector<Judgment> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        auto it = by_id.find(s.id);
        if (it == by_id.end()) throw InvalidInput("missing record: " + s.id);
        out.push_back(judge_sample(s, *it->second, config));
    }
    return out;
}

std::vector<CorrectionExample> build_correction_dataset(std::span<const Sample> samples,
                                                        std::span<const GenerationRecord> records,
                                                        const JudgeConfig& config) {
    const auto judgments = judge_dataset(samples, records, config);
    std::vector<CorrectionExample> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out.push_back({samples[i].id, samples[i].question, judgments[i].corrector_target});
    return out;
}

std::vector<CorrectionExample> correction_dataset_from_judgments(std::span<const Sample> samples,
                                                                 std::span<const Judgment> judgments) {
    std::map<std::string_view, const Judgment*> by_id;
    for (const auto& j : judgments) by_id.emplace(j.id, &j);
    std::vector<CorrectionExample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        auto it = by_id.find(s.id);
        if (it == by_id.end()) throw InvalidInput("missing judgment: " + s.id);
        out.push_back({s.id, s.question, it->second->corrector_target});
    }
    return out;
}

}  // namespace cue
