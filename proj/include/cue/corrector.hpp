#pragma once

#include "cue/judge.hpp"
#include "cue/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cue {

/// Hashed word n-gram features. Stands in for a sentence encoder: the model
/// on top is the same linear layer + sigmoid trained with BCE.
struct FeatureExtractor {
    std::uint32_t n_buckets = 1u << 18;  // power of two
    std::vector<int> ngram_orders{1, 2};
    std::uint64_t hash_seed = 0;

    bool operator==(const FeatureExtractor&) const = default;
};

void validate(const FeatureExtractor& extractor);

/// (bucket, count) pairs sorted by bucket, no duplicates, counts > 0.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

SparseVector featurize(std::string_view question, const FeatureExtractor& extractor);

struct TrainingMeta {
    std::uint64_t seed = 0;
    int epochs = 0;
    double learning_rate = 0.0;
    std::size_t batch_size = 0;
    std::size_t n_examples = 0;
    double initial_loss = 0.0;  // mean BCE before the first update
    double final_loss = 0.0;    // mean BCE after the last epoch
    std::vector<double> epoch_losses;
    std::vector<std::string> warnings;

    bool operator==(const TrainingMeta&) const = default;
};

struct CorrectorModel {
    FeatureExtractor extractor;
    std::vector<double> weights;  // n_buckets
    double bias = 0.0;
    TrainingMeta meta;

    /// All-zero model: predicts exactly 0.5 everywhere.
    static CorrectorModel zeros(const FeatureExtractor& extractor);

    double logit(const SparseVector& features) const;

    bool operator==(const CorrectorModel&) const = default;
};

/// Logistic function kept strictly inside (0, 1).
double sigmoid(double z);

constexpr double kLogClampEpsilon = 1e-12;

/// Summed binary cross-entropy; predictions are clamped to
/// [kLogClampEpsilon, 1 - kLogClampEpsilon] before taking logs.
double bce_loss(std::span<const double> predictions, std::span<const int> targets);

struct BceGradient {
    std::vector<double> weights;  // dense, n_buckets
    double bias = 0.0;
};

/// Gradient of the summed BCE of `model` on (features, targets).
BceGradient bce_gradient(const CorrectorModel& model, std::span<const SparseVector> features,
                         std::span<const int> targets);

/// Summed BCE of `model` on pre-featurized data.
double model_loss(const CorrectorModel& model, std::span<const SparseVector> features, std::span<const int> targets);

struct TrainOptions {
    std::uint64_t seed = 42;
    int epochs = 10;
    double learning_rate = 0.1;
    std::size_t batch_size = 32;
};

/// Mini-batch SGD on mean-per-batch BCE from zero weights. The example order is
/// reshuffled each epoch from a generator seeded once with `options.seed`, so
/// results are bit-identical for identical inputs.
CorrectorModel train_corrector(std::span<const CorrectionExample> dataset, const FeatureExtractor& extractor,
                               const TrainOptions& options);

double predict(const CorrectorModel& model, std::string_view question);

/// CORRECTOR score set over the given samples.
ScoreSet corrector_scores(const CorrectorModel& model, std::span<const Sample> samples);

/// Pass-through of adapter-trained corrector probabilities.
ScoreSet scores_from_external(std::span<const GenerationRecord> records);

constexpr int kModelFormatVersion = 1;

std::string model_to_json(const CorrectorModel& model);
CorrectorModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const CorrectorModel& model);
CorrectorModel load_model(const std::filesystem::path& path);

}  // namespace cue
