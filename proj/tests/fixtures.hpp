#pragma once

#include "cue/types.hpp"

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixture {

/// Generation whose tokens are "t0", "t1", ... with the given logprobs.
inline cue::Generation gen(std::vector<double> logprobs, std::string text = "") {
    cue::Generation g;
    for (std::size_t i = 0; i < logprobs.size(); ++i) g.tokens.push_back(" t" + std::to_string(i));
    g.text = text.empty() ? "text" : text;
    g.token_logprobs = std::move(logprobs);
    return g;
}

inline cue::GenerationRecord record(std::string id, std::vector<cue::Generation> gens) {
    cue::GenerationRecord r;
    r.id = std::move(id);
    r.generations = std::move(gens);
    return r;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cue_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture
