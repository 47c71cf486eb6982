#pragma once

#include "cue/types.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cue {

struct Violation {
    std::string id;
    std::string kind;  // e.g. "length mismatch", "orphan record"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    /// Number of records each method can score (logprob availability, B >= 2
    /// for LS, optional pass-through fields).
    std::map<Method, std::size_t> usable_records;

    bool ok() const { return violations.empty(); }
    std::size_t count(std::string_view kind) const;
};

/// Whether `method` has everything it needs in `record`. FUSED is never
/// directly available.
bool method_available(const GenerationRecord& record, Method method);

ValidationReport validate_dataset(std::span<const Sample> samples,
                                  std::span<const GenerationRecord> records);

/// Seeded Fisher-Yates over the sorted ids; |dev| = round(dev_fraction * n).
DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed, double dev_fraction = 0.5);

}  // namespace cue
