#include "cue/types.hpp"

#include "cue/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

namespace cue {

double Generation::sequence_logprob() const {
    if (!token_logprobs) throw InvalidInput("method requires token logprobs");
    return std::accumulate(token_logprobs->begin(), token_logprobs->end(), 0.0);
}

bool GenerationRecord::all_have_logprobs() const {
    return !generations.empty() &&
           std::all_of(generations.begin(), generations.end(),
                       [](const Generation& g) { return g.has_logprobs(); });
}

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 11> kMethodNames{{
    {Method::pe, "pe"},
    {Method::ln_pe, "ln-pe"},
    {Method::se, "se"},
    {Method::sar_t, "sar-t"},
    {Method::sar_s, "sar-s"},
    {Method::sar, "sar"},
    {Method::ls, "ls"},
    {Method::vc, "vc"},
    {Method::ptrue, "ptrue"},
    {Method::corrector, "corrector"},
    {Method::fused, "fused"},
}};

}  // namespace

std::string_view method_name(Method m) {
    for (const auto& [method, name] : kMethodNames)
        if (method == m) return name;
    return "unknown";
}

Method parse_method(std::string_view name) {
    std::string lowered(name);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(lowered.begin(), lowered.end(), '_', '-');
    for (const auto& [method, spelled] : kMethodNames)
        if (spelled == lowered) return method;
    throw InvalidInput("unknown method: " + std::string(name));
}

bool method_needs_logprobs(Method m) {
    switch (m) {
        case Method::pe:
        case Method::ln_pe:
        case Method::se:
        case Method::sar_t:
        case Method::sar_s:
        case Method::sar:
            return true;
        default:
            return false;
    }
}

Labels labels_from_judgments(const std::vector<Judgment>& judgments) {
    Labels labels;
    for (const auto& j : judgments) labels[j.id] = j.corrector_target;
    return labels;
}

}  // namespace cue
