#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cue {

struct Sample {
    std::string id;
    std::string question;
    std::string reference_answer;

    bool operator==(const Sample&) const = default;
};

/// One sampled response. `token_logprobs` is absent when the producer did not
/// export log-probabilities; such records still serve LS/VC/PTRUE/CORRECTOR.
struct Generation {
    std::string text;
    std::vector<std::string> tokens;
    std::optional<std::vector<double>> token_logprobs;

    bool has_logprobs() const { return token_logprobs.has_value(); }
    /// Sum of token log-probabilities. Requires has_logprobs().
    double sequence_logprob() const;

    bool operator==(const Generation&) const = default;
};

struct GenerationRecord {
    std::string id;
    std::vector<Generation> generations;
    std::size_t primary_index = 0;
    std::optional<double> verbal_confidence;        // [0, 100]
    std::optional<double> p_true;                   // [0, 1]
    std::optional<bool> llm_judge;
    std::optional<double> external_corrector_prob;  // [0, 1]

    const Generation& primary() const { return generations.at(primary_index); }
    bool all_have_logprobs() const;

    bool operator==(const GenerationRecord&) const = default;
};

struct Judgment {
    std::string id;
    double rouge_l = 0.0;
    bool rule_correct = false;
    std::optional<bool> llm_correct;
    bool correct = false;
    int corrector_target = 1;  // 1 - correct

    bool operator==(const Judgment&) const = default;
};

enum class Method { pe, ln_pe, se, sar_t, sar_s, sar, ls, vc, ptrue, corrector, fused };

/// CLI / file spelling, e.g. "ln-pe", "sar-t".
std::string_view method_name(Method m);
/// Accepts the CLI spelling case-insensitively; throws InvalidInput otherwise.
Method parse_method(std::string_view name);
/// True for methods that need token log-probabilities.
bool method_needs_logprobs(Method m);

/// Per-sample uncertainty scores of one method. Keys are sample ids; a
/// std::map keeps iteration (and therefore file output) order stable.
struct ScoreSet {
    Method method = Method::pe;
    std::map<std::string, double> scores;
    bool normalized = false;

    bool operator==(const ScoreSet&) const = default;
};

struct DatasetSplit {
    std::vector<std::string> dev_ids;   // sorted
    std::vector<std::string> test_ids;  // sorted
    std::uint64_t seed = 0;
    double dev_fraction = 0.5;

    bool operator==(const DatasetSplit&) const = default;
};

/// id -> 1 (unreliable) / 0 (reliable).
using Labels = std::map<std::string, int>;

Labels labels_from_judgments(const std::vector<Judgment>& judgments);

}  // namespace cue
