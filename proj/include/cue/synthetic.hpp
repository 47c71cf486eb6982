#pragma once

#include "cue/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cue::synthetic {

/// Knobs for the bundled synthetic QA fixture. Question wording carries the
/// difficulty signal (hard topics are usually answered wrong), while token
/// log-probabilities are only weakly tied to correctness.
struct Config {
    std::size_t n_train = 400;
    std::size_t n_eval = 200;
    std::size_t generations = 5;
    std::uint64_t seed = 42;
    double p_wrong_hard = 0.85;
    double p_wrong_easy = 0.15;
};

struct Dataset {
    std::vector<Sample> train_samples;
    std::vector<GenerationRecord> train_records;
    std::vector<Sample> samples;
    std::vector<GenerationRecord> records;
};

Dataset make_dataset(const Config& config);

/// Writes train_samples.jsonl, train_generations.jsonl, samples.jsonl,
/// generations.jsonl and a pipeline.json pointing at them into `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& data);

}  // namespace cue::synthetic
