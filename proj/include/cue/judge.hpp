#pragma once

#include "cue/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cue {

/// Lowercases, splits on whitespace and strips punctuation from both ends of
/// each token. Tokens that become empty are dropped.
std::vector<std::string> normalize_tokens(std::string_view text);

/// Longest common subsequence length over token sequences (O(|a||b|) time,
/// O(min) memory).
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS over normalized tokens divided by the shorter token count; 0 when
/// either side is empty after normalization.
double rouge_l(std::string_view candidate, std::string_view reference);
double rouge_l_tokens(std::span<const std::string> a, std::span<const std::string> b);

struct JudgeConfig {
    double rouge_threshold = 0.7;  // strict: rouge_l must exceed it
    bool use_llm_judge = true;
};

void validate(const JudgeConfig& config);

Judgment judge_sample(const Sample& sample, const GenerationRecord& record, const JudgeConfig& config);

std::vector<Judgment> judge_dataset(std::span<const Sample> samples, std::span<const GenerationRecord> records,
                                    const JudgeConfig& config);

struct CorrectionExample {
    std::string id;
    std::string question;
    int target = 0;  // 1 = target model answered unreliably
};

/// One example per sample in sample order, labelled 1 - correct.
std::vector<CorrectionExample> build_correction_dataset(std::span<const Sample> samples,
                                                        std::span<const GenerationRecord> records,
                                                        const JudgeConfig& config);

/// Same dataset from already-written judgments (joined to samples by id).
std::vector<CorrectionExample> correction_dataset_from_judgments(std::span<const Sample> samples,
                                                                 std::span<const Judgment> judgments);

}  // namespace cue
