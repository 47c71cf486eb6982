#pragma once

#include "cue/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cue::io {

using Json = nlohmann::ordered_json;

/// Non-fatal parse notes (unknown keys and the like), one per entry.
using Warnings = std::vector<std::string>;

std::string read_text_file(const std::filesystem::path& path);

/// Writes `content` to `path` through a sibling temp file and a rename, so a
/// reader never observes a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Per-type JSON mapping. `from_json` throws InvalidInput on structural errors
// and appends unknown-key warnings when `warnings` is non-null.
Json to_json(const Sample& s);
Json to_json(const Generation& g);
Json to_json(const GenerationRecord& r);
Json to_json(const Judgment& j);
Json to_json(const DatasetSplit& s);

Sample sample_from_json(const Json& j, Warnings* warnings = nullptr);
GenerationRecord record_from_json(const Json& j, Warnings* warnings = nullptr);
Judgment judgment_from_json(const Json& j, Warnings* warnings = nullptr);
DatasetSplit split_from_json(const Json& j);

/// Serialized number/key order is fixed, so equal inputs give equal bytes.
std::string dump_jsonl(const std::vector<Json>& rows);
std::vector<Json> parse_jsonl(const std::string& text, const std::string& source_name);

std::vector<Sample> read_samples(const std::filesystem::path& path, Warnings* warnings = nullptr);
std::vector<GenerationRecord> read_generations(const std::filesystem::path& path,
                                               Warnings* warnings = nullptr);
std::vector<Judgment> read_judgments(const std::filesystem::path& path, Warnings* warnings = nullptr);
ScoreSet read_scores(const std::filesystem::path& path);
DatasetSplit read_split(const std::filesystem::path& path);

void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples);
void write_generations(const std::filesystem::path& path, const std::vector<GenerationRecord>& records);
void write_judgments(const std::filesystem::path& path, const std::vector<Judgment>& judgments);
void write_scores(const std::filesystem::path& path, const ScoreSet& scores);
void write_split(const std::filesystem::path& path, const DatasetSplit& split);
void write_json(const std::filesystem::path& path, const Json& value);

std::string scores_to_jsonl(const ScoreSet& scores);
ScoreSet scores_from_jsonl(const std::string& text, const std::string& source_name);

}  // namespace cue::io
