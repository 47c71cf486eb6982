#pragma once

#include "cue/corrector.hpp"
#include "cue/estimators.hpp"
#include "cue/fusion.hpp"
#include "cue/io.hpp"
#include "cue/judge.hpp"
#include "cue/metrics.hpp"
#include "cue/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cue {

/// Everything one end-to-end run needs. Paths in a config file are resolved
/// against the file's directory.
struct PipelineConfig {
    std::filesystem::path train_samples;
    std::filesystem::path train_generations;
    std::filesystem::path samples;
    std::filesystem::path generations;
    std::optional<std::filesystem::path> similarities;
    std::filesystem::path out_dir = "out";

    std::vector<Method> methods{Method::pe};
    std::uint64_t seed = 42;
    double dev_fraction = 0.5;

    JudgeConfig judge;
    EstimatorConfig estimators;
    FeatureExtractor extractor;
    TrainOptions training;  // training.seed follows `seed`
    bool external_corrector = false;  // use external_corrector_prob instead of training
    FusionConfig fusion;
    EvalConfig evaluation;
    unsigned jobs = 1;
};

/// Parses a pipeline config JSON document. Unknown keys are reported through
/// `warnings`.
PipelineConfig pipeline_config_from_json(const io::Json& j, const std::filesystem::path& base_dir,
                                         io::Warnings* warnings = nullptr);
PipelineConfig load_pipeline_config(const std::filesystem::path& path, io::Warnings* warnings = nullptr);

/// Throws IoError naming the first configured input that does not exist.
void check_inputs_exist(const PipelineConfig& config);

/// judge -> split -> train corrector -> score -> fuse -> evaluate, writing
/// every artifact into config.out_dir. Progress lines go to `log`.
void run_pipeline(const PipelineConfig& config, std::ostream& log);

/// Artifact file names inside out_dir.
namespace artifacts {
inline constexpr const char* judgments = "judgments.jsonl";
inline constexpr const char* train_judgments = "train_judgments.jsonl";
inline constexpr const char* split = "split.json";
inline constexpr const char* model = "corrector.model";
inline constexpr const char* corrector_scores = "corrector_scores.jsonl";
inline constexpr const char* summary = "summary.json";
std::string scores(Method m);
std::string fused(Method m);
std::string fusion_report(Method m);
std::string eval_report(Method m);
std::string calibration(Method m);
}  // namespace artifacts

/// Evaluation labels and split id set share the judged samples' ids.
std::vector<std::string> sample_ids(const std::vector<Sample>& samples);

/// Normalizes `scores` over the split's dev + test ids.
ScoreSet normalize_over_split(const ScoreSet& scores, const DatasetSplit& split);

}  // namespace cue
