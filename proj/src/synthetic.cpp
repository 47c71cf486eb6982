#include "cue/synthetic.hpp"

#include "cue/io.hpp"
#include "cue/rng.hpp"

#include <array>
#include <cmath>
#include <string_view>

namespace cue::synthetic {

namespace {

constexpr std::array<std::string_view, 8> kHardTopics{"quantum",  "medieval", "byzantine", "cryptic",
                                                      "subatomic", "arcane",  "baroque",   "esoteric"};
constexpr std::array<std::string_view, 8> kEasyTopics{"kitchen", "garden",    "playground", "family",
                                                      "weather", "breakfast", "school",     "animal"};
constexpr std::array<std::string_view, 6> kAttributes{"name", "color", "origin", "symbol", "code", "shape"};
constexpr std::array<std::string_view, 16> kAnswers{"amber", "basalt", "cedar",  "delta", "ember",  "fjord",
                                                    "garnet", "harbor", "indigo", "juniper", "kestrel", "lagoon",
                                                    "marble", "nectar", "onyx",   "pepper"};

template <typename Array>
std::string_view pick(const Array& a, std::mt19937_64& rng) {
    return a[static_cast<std::size_t>(uniform_index(rng, a.size()))];
}

std::string other_answer(std::string_view avoid, std::mt19937_64& rng) {
    std::string_view a = pick(kAnswers, rng);
    while (a == avoid) a = pick(kAnswers, rng);
    return std::string(a);
}

Generation make_generation(const std::string& text, double mean_nll, std::mt19937_64& rng) {
    Generation g;
    g.text = text;
    std::vector<double> lps;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find(' ', start + 1);
        if (end == std::string::npos) end = text.size();
        g.tokens.push_back(text.substr(start, end - start));
        // Three-decimal logprobs keep the fixture files short and exact.
        const double nll = mean_nll * 2.0 * uniform_unit(rng);
        lps.push_back(-std::round(nll * 1000.0) / 1000.0);
        start = end;
    }
    g.token_logprobs = std::move(lps);
    return g;
}

std::pair<Sample, GenerationRecord> make_item(const std::string& id, const Config& config, std::mt19937_64& rng) {
    const bool hard = uniform_unit(rng) < 0.5;
    const auto topic = hard ? pick(kHardTopics, rng) : pick(kEasyTopics, rng);
    const auto attribute = pick(kAttributes, rng);
    const auto reference = std::string(pick(kAnswers, rng));
    const bool wrong = uniform_unit(rng) < (hard ? config.p_wrong_hard : config.p_wrong_easy);

    Sample s{id, "In " + std::string(topic) + " trivia, what is the " + std::string(attribute) + " of item " + id + "?",
             reference};

    GenerationRecord r;
    r.id = id;
    // Log-probabilities only weakly track correctness.
    const double mean_nll = wrong ? 0.55 : 0.4;
    std::string primary;
    if (!wrong) {
        const double style = uniform_unit(rng);
        if (style < 0.6) {
            primary = reference;
        } else if (style < 0.85) {
            primary = "it is " + reference;
        } else {
            // Paraphrase the rule misses but the LLM judge accepts.
            primary = reference + "ish";
            r.llm_judge = true;
        }
    } else {
        primary = other_answer(reference, rng);
        if (uniform_unit(rng) < 0.5) r.llm_judge = false;
    }
    r.generations.push_back(make_generation(primary, mean_nll, rng));
    for (std::size_t b = 1; b < config.generations; ++b) {
        const bool agree = uniform_unit(rng) < (wrong ? 0.3 : 0.7);
        const std::string text = agree ? primary : other_answer(reference, rng);
        r.generations.push_back(make_generation(text, mean_nll, rng));
    }
    r.verbal_confidence = std::round((wrong ? 35.0 : 50.0) + 50.0 * uniform_unit(rng));
    r.p_true = std::round(((wrong ? 0.3 : 0.4) + 0.6 * uniform_unit(rng)) * 1000.0) / 1000.0;
    return {std::move(s), std::move(r)};
}

std::string padded(const char* prefix, std::size_t i) {
    std::string digits = std::to_string(i);
    while (digits.size() < 4) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

}  // namespace

Dataset make_dataset(const Config& config) {
    std::mt19937_64 rng(config.seed);
    Dataset d;
    for (std::size_t i = 0; i < config.n_train; ++i) {
        auto [s, r] = make_item(padded("t", i), config, rng);
        d.train_samples.push_back(std::move(s));
        d.train_records.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < config.n_eval; ++i) {
        auto [s, r] = make_item(padded("q", i), config, rng);
        d.samples.push_back(std::move(s));
        d.records.push_back(std::move(r));
    }
    return d;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
    io::write_samples(dir / "train_samples.jsonl", data.train_samples);
    io::write_generations(dir / "train_generations.jsonl", data.train_records);
    io::write_samples(dir / "samples.jsonl", data.samples);
    io::write_generations(dir / "generations.jsonl", data.records);
    io::Json cfg;
    cfg["train_samples"] = "train_samples.jsonl";
    cfg["train_generations"] = "train_generations.jsonl";
    cfg["samples"] = "samples.jsonl";
    cfg["generations"] = "generations.jsonl";
    cfg["out_dir"] = "out";
    cfg["methods"] = {"pe", "ln-pe", "se", "sar-t", "sar-s", "sar", "ls", "vc", "ptrue"};
    cfg["seed"] = 42;
    io::write_json(dir / "pipeline.json", cfg);
}

}  // namespace cue::synthetic
