#pragma once

#include "cue/types.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cue {

/// Adapter-supplied similarities for one record.
struct SimilarityEntry {
    std::vector<std::vector<double>> pairwise;         // B x B, symmetric, unit diagonal
    std::vector<std::vector<double>> token_relevance;  // one row per generation, one value per token
};

/// Source of generation-pair similarity and per-token relevance.
///
/// The rouge_l kind derives both from the text: pair similarity is ROUGE-L
/// between generation texts, and a token's relevance is
/// 1 - ROUGE-L(concatenated tokens, concatenated tokens without it).
/// The precomputed kind reads them from a similarities.jsonl sidecar.
class SimilarityOracle {
public:
    enum class Kind { rouge_l, precomputed };

    static SimilarityOracle rouge();
    static SimilarityOracle precomputed(std::map<std::string, SimilarityEntry> entries);

    Kind kind() const { return kind_; }

    /// B x B similarity matrix for the record's generations.
    std::vector<std::vector<double>> pairwise(const GenerationRecord& record) const;
    /// Relevance r_l in [0, 1] of every token of generation `b`.
    std::vector<double> token_relevance(const GenerationRecord& record, std::size_t b) const;

private:
    SimilarityOracle(Kind kind, std::shared_ptr<const std::map<std::string, SimilarityEntry>> entries)
        : kind_(kind), entries_(std::move(entries)) {}

    const SimilarityEntry& entry(const std::string& id) const;

    Kind kind_;
    std::shared_ptr<const std::map<std::string, SimilarityEntry>> entries_;
};

/// Reads and checks similarities.jsonl (ranges, symmetry, unit diagonal).
std::map<std::string, SimilarityEntry> read_similarity_sidecar(const std::filesystem::path& path);

struct SarConfig {
    double sentence_temperature = 0.001;
    bool use_length_normalized_probs = false;
};

struct EstimatorConfig {
    double equivalence_threshold = 0.7;  // SE clustering
    SarConfig sar;
};

using Cluster = std::vector<std::size_t>;

double predictive_entropy(const GenerationRecord& record);
double length_normalized_pe(const GenerationRecord& record);

/// Greedy first-fit clustering in input order against each cluster's first
/// member; similarity must reach the threshold in both directions.
std::vector<Cluster> cluster_generations(const GenerationRecord& record, const SimilarityOracle& oracle,
                                         double equivalence_threshold);

/// -(1/C) sum_c ln P(c), P(c) summing the members' sequence probabilities.
double semantic_entropy(const GenerationRecord& record, std::span<const Cluster> clusters);

/// Relevance-weighted negative token log-probability, averaged over generations.
double sar_token(const GenerationRecord& record, const SimilarityOracle& oracle);

/// -(1/B) sum_b ln(p_b + (1/t) sum_{j != b} sim(b, j) p_j). Can be negative:
/// the shifted probability may exceed 1.
double sar_sentence(const GenerationRecord& record, const SimilarityOracle& oracle, const SarConfig& config);

/// Sentence shift applied to token-reweighted probabilities
/// exp(sum_l w_l * logprob_l).
double sar_combined(const GenerationRecord& record, const SimilarityOracle& oracle, const SarConfig& config);

double lexical_similarity_uncertainty(const GenerationRecord& record);
double verbal_confidence_uncertainty(const GenerationRecord& record);
double ptrue_uncertainty(const GenerationRecord& record);

/// Normalized token weights for generation `b` (uniform when all relevances
/// are zero).
std::vector<double> token_weights(const GenerationRecord& record, std::size_t b, const SimilarityOracle& oracle);

double score_record(Method method, const GenerationRecord& record, const SimilarityOracle& oracle,
                    const EstimatorConfig& config);

/// Scores every record; `jobs` > 1 fans records out over worker threads.
ScoreSet score_dataset(Method method, std::span<const GenerationRecord> records, const SimilarityOracle& oracle,
                       const EstimatorConfig& config, unsigned jobs = 1);

}  // namespace cue
